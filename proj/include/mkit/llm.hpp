#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "mkit/error.hpp"

namespace mkit {

/// Text-completion backend.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

/// Offline stand-in: recognizes the task tag at the top of each prompt and
/// returns a fixed, deterministic response for it.
class MockLlmClient : public LlmClient {
 public:
  std::string complete(const std::string& prompt) override;
};

/// POSTs the prompt as text/plain to an HTTP endpoint and returns the
/// response body. Retries twice with exponential backoff before raising
/// ClientError. Configuration comes from the constructor or, by default,
/// the LLM_ENDPOINT, LLM_TOKEN and LLM_MODEL environment variables.
class HttpLlmClient : public LlmClient {
 public:
  HttpLlmClient();
  HttpLlmClient(std::string endpoint, std::string token = "", std::string model = "");

  std::string complete(const std::string& prompt) override;

  void set_backoff_ms(int ms) { backoff_ms_ = ms; }

 private:
  std::string endpoint_;
  std::string token_;
  std::string model_;
  int backoff_ms_ = 250;
};

/// The three prompt templates, loaded from plot_generation.txt,
/// order_extraction.txt and order_revision.txt in one directory.
struct PromptTemplates {
  std::string plot;
  std::string extraction;
  std::string revision;
};

PromptTemplates load_templates(const std::string& dir);

/// Ask for a scene plot over the given object names. Each helper fills the
/// template's placeholder, runs the client, and (optionally) appends the
/// request/response pair to a log stream.
std::string generate_plot(LlmClient& client, const PromptTemplates& templates,
                          const std::vector<std::string>& object_names, std::ostream* log = nullptr);

/// Ask for per-character order lists for a plot.
std::string extract_orders(LlmClient& client, const PromptTemplates& templates, const std::string& plot,
                           std::ostream* log = nullptr);

/// Ask for a synchronized rewrite of two order lists.
std::string revise_orders(LlmClient& client, const PromptTemplates& templates, const std::string& orders_a,
                          const std::string& orders_b, std::ostream* log = nullptr);

}  // namespace mkit
