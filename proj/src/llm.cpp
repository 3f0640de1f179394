#include "mkit/llm.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"

namespace mkit {
namespace {

constexpr const char* kMockPlot =
    "Two roommates wander into the living room. The first flops onto the sofa while the second "
    "perches on the stool. They meet in the middle of the room and hug. After drifting apart, the "
    "first settles into the chair, a quarrel flares up, and the two fight before storming off.";

constexpr const char* kMockOrders =
    "Orders 1: [None, sofa, HHI: Two persons hug with each other, None, chair, HHI: Two persons "
    "fight with each other]\n"
    "Orders 2: [None, stool, None, None, HHI: Two persons hug with each other, None, HHI: Two "
    "persons fight with each other]\n";

std::string env_or(const char* name, const char* fallback) {
  const char* v = std::getenv(name);
  return v ? v : fallback;
}

std::string replace_all(std::string text, const std::string& needle, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), value);
    pos += value.size();
  }
  return text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string run_logged(LlmClient& client, const std::string& label, const std::string& prompt,
                       std::ostream* log) {
  if (log) *log << "--- request (" << label << ") ---\n" << prompt << "\n";
  const std::string response = client.complete(prompt);
  if (log) *log << "--- response (" << label << ") ---\n" << response << "\n";
  return response;
}

}  // namespace

std::string MockLlmClient::complete(const std::string& prompt) {
  if (prompt.find("TASK: write") != std::string::npos) return kMockPlot;
  if (prompt.find("TASK: extract") != std::string::npos) return kMockOrders;
  if (prompt.find("TASK: revise") != std::string::npos) {
    // Echo the order lines embedded in the prompt, i.e. accept them as-is.
    std::istringstream in(prompt);
    std::string line, out;
    while (std::getline(in, line)) {
      if (line.rfind("Orders", 0) == 0) out += line + "\n";
    }
    return out.empty() ? kMockOrders : out;
  }
  return "OK";
}

HttpLlmClient::HttpLlmClient()
    : HttpLlmClient(env_or("LLM_ENDPOINT", ""), env_or("LLM_TOKEN", ""), env_or("LLM_MODEL", "")) {}

HttpLlmClient::HttpLlmClient(std::string endpoint, std::string token, std::string model)
    : endpoint_(std::move(endpoint)), token_(std::move(token)), model_(std::move(model)) {
  if (endpoint_.empty()) {
    throw Error(Errc::ClientError, "no endpoint configured (set LLM_ENDPOINT)");
  }
}

std::string HttpLlmClient::complete(const std::string& prompt) {
  // Split "scheme://host:port/path" into the client base and request path.
  std::string base = endpoint_;
  std::string path = "/";
  const std::size_t scheme = endpoint_.find("://");
  const std::size_t slash = endpoint_.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash != std::string::npos) {
    base = endpoint_.substr(0, slash);
    path = endpoint_.substr(slash);
  }

  httplib::Client client(base);
  client.set_connection_timeout(10);
  client.set_read_timeout(60);

  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
  if (!model_.empty()) headers.emplace("X-Model", model_);

  std::string last_error;
  constexpr int kAttempts = 3;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms_ << (attempt - 1)));
    }
    auto res = client.Post(path, headers, prompt, "text/plain");
    if (res && res->status == 200) return res->body;
    if (res) {
      last_error = "HTTP status " + std::to_string(res->status);
    } else {
      last_error = "transport error " + httplib::to_string(res.error());
    }
  }
  throw Error(Errc::ClientError, "request to " + endpoint_ + " failed: " + last_error);
}

PromptTemplates load_templates(const std::string& dir) {
  PromptTemplates t;
  t.plot = read_file(dir + "/plot_generation.txt");
  t.extraction = read_file(dir + "/order_extraction.txt");
  t.revision = read_file(dir + "/order_revision.txt");
  return t;
}

std::string generate_plot(LlmClient& client, const PromptTemplates& templates,
                          const std::vector<std::string>& object_names, std::ostream* log) {
  std::string joined;
  for (std::size_t i = 0; i < object_names.size(); ++i) {
    if (i > 0) joined += ", ";
    joined += object_names[i];
  }
  const std::string prompt = replace_all(templates.plot, "OBJECT NAMES IN THE 3D SCENE", joined);
  return run_logged(client, "plot", prompt, log);
}

std::string extract_orders(LlmClient& client, const PromptTemplates& templates, const std::string& plot,
                           std::ostream* log) {
  const std::string prompt = replace_all(templates.extraction, "PLOT PARAGRAPH", plot);
  return run_logged(client, "orders", prompt, log);
}

std::string revise_orders(LlmClient& client, const PromptTemplates& templates, const std::string& orders_a,
                          const std::string& orders_b, std::ostream* log) {
  std::string prompt = replace_all(templates.revision, "ORDER FOR CHARACTER 1", orders_a);
  prompt = replace_all(prompt, "ORDER FOR CHARACTER 2", orders_b);
  return run_logged(client, "revision", prompt, log);
}

}  // namespace mkit
