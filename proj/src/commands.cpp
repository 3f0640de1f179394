#include "mkit/commands.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mkit {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

[[noreturn]] void grammar_error(int line, int column, const std::string& what) {
  throw Error(Errc::GrammarError, what + " (line " + std::to_string(line) + ", column " +
                                      std::to_string(column) + ")");
}

/// Split the bracketed list starting at s[open] ('[') into top-level comma
/// tokens. Returns the index one past the closing bracket.
std::size_t split_list(const std::string& s, std::size_t open, int line,
                       std::vector<std::string>& tokens) {
  int depth = 0;
  std::size_t token_start = open + 1;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '[') {
      ++depth;
    } else if (c == ']') {
      --depth;
      if (depth == 0) {
        tokens.push_back(s.substr(token_start, i - token_start));
        return i + 1;
      }
      if (depth < 0) grammar_error(line, static_cast<int>(i) + 1, "unmatched ']'");
    } else if (c == ',' && depth == 1) {
      tokens.push_back(s.substr(token_start, i - token_start));
      token_start = i + 1;
    }
  }
  grammar_error(line, static_cast<int>(s.size()) + 1, "missing closing ']'");
}

Command classify_token(const std::string& raw_token, int line) {
  Command cmd;
  cmd.raw = trim(raw_token);
  const std::string& tok = cmd.raw;

  if (tok.empty()) {
    cmd.kind = CommandKind::Invalid;
    cmd.invalid_reason = InvalidReason::Malformed;
    return cmd;
  }

  if (lower(tok) == "none") {
    cmd.kind = CommandKind::Locomotion;
    return cmd;
  }

  if (lower(tok).rfind("hhi:", 0) == 0) {
    const std::string text = trim(tok.substr(4));
    if (text.empty()) {
      cmd.kind = CommandKind::Invalid;
      cmd.invalid_reason = InvalidReason::Malformed;
      return cmd;
    }
    cmd.kind = CommandKind::Hhi;
    cmd.hhi_text = text;
    return cmd;
  }

  if (tok.front() == '[') {
    std::vector<std::string> parts;
    const std::size_t end = split_list(tok, 0, line, parts);
    if (trim(tok.substr(end)) != "" || parts.size() != 2) {
      cmd.kind = CommandKind::Invalid;
      cmd.invalid_reason = InvalidReason::Malformed;
      return cmd;
    }
    const std::string object = trim(parts[0]);
    const std::string motion = lower(trim(parts[1]));
    if (object.empty() || motion.empty()) {
      cmd.kind = CommandKind::Invalid;
      cmd.invalid_reason = InvalidReason::Malformed;
      return cmd;
    }
    cmd.object = object;
    if (motion == "sit") {
      cmd.kind = CommandKind::SceneInteraction;
      cmd.motion = MotionType::Sit;
    } else if (motion == "lie") {
      cmd.kind = CommandKind::SceneInteraction;
      cmd.motion = MotionType::Lie;
    } else {
      cmd.kind = CommandKind::Invalid;
      cmd.invalid_reason = InvalidReason::UnknownMotionType;
    }
    return cmd;
  }

  if (tok.find('[') != std::string::npos || tok.find(']') != std::string::npos) {
    cmd.kind = CommandKind::Invalid;
    cmd.invalid_reason = InvalidReason::Malformed;
    return cmd;
  }

  cmd.kind = CommandKind::Locomotion;
  cmd.target = tok;
  return cmd;
}

std::vector<Command> parse_order_list(const std::string& s, int line) {
  const std::size_t open = s.find('[');
  if (open == std::string::npos) grammar_error(line, 1, "expected '[' to start the order list");
  if (!trim(s.substr(0, open)).empty()) {
    grammar_error(line, 1, "unexpected text before '['");
  }
  std::vector<std::string> tokens;
  const std::size_t end = split_list(s, open, line, tokens);
  if (!trim(s.substr(end)).empty()) {
    grammar_error(line, static_cast<int>(end) + 1, "unexpected text after ']'");
  }

  std::vector<Command> commands;
  // A lone empty list "[]" holds no commands.
  if (tokens.size() == 1 && trim(tokens[0]).empty()) return commands;
  commands.reserve(tokens.size());
  for (const auto& t : tokens) commands.push_back(classify_token(t, line));
  return commands;
}

int hhi_count(const std::vector<Command>& commands) {
  return static_cast<int>(std::count_if(commands.begin(), commands.end(), [](const Command& c) {
    return c.kind == CommandKind::Hhi;
  }));
}

}  // namespace

std::string command_to_string(const Command& cmd) {
  switch (cmd.kind) {
    case CommandKind::Locomotion:
      return cmd.target ? *cmd.target : "None";
    case CommandKind::SceneInteraction:
      return "[" + *cmd.object + ", " + (cmd.motion == MotionType::Sit ? "sit" : "lie") + "]";
    case CommandKind::Hhi:
      return "HHI: " + cmd.hhi_text;
    case CommandKind::Invalid:
      return cmd.raw;
  }
  return cmd.raw;
}

std::string write_script(const CommandScript& script) {
  std::string out;
  for (std::size_t c = 0; c < script.characters.size(); ++c) {
    out += "Orders " + script.characters[c] + ": [";
    for (std::size_t i = 0; i < script.commands[c].size(); ++i) {
      if (i > 0) out += ", ";
      out += command_to_string(script.commands[c][i]);
    }
    out += "]\n";
  }
  return out;
}

CommandScript parse_commands(const std::string& text) {
  std::vector<std::pair<int, std::string>> lines;  // (line number, content)
  {
    std::istringstream in(text);
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
      ++no;
      if (!trim(line).empty()) lines.emplace_back(no, line);
    }
  }
  if (lines.empty()) throw Error(Errc::EmptyInput, "order text holds no content");

  CommandScript script;
  const bool labeled = lower(trim(lines.front().second)).rfind("orders", 0) == 0;

  if (!labeled) {
    // Single unnamed character: the entire text is one order list.
    if (lines.size() != 1) grammar_error(lines[1].first, 1, "expected a single order list");
    script.characters.push_back("1");
    script.commands.push_back(parse_order_list(lines[0].second, lines[0].first));
    return script;
  }

  for (const auto& [no, raw] : lines) {
    const std::string line = trim(raw);
    if (lower(line).rfind("orders", 0) != 0) grammar_error(no, 1, "expected 'Orders <label>:'");
    const std::size_t colon = line.find(':');
    if (colon == std::string::npos) grammar_error(no, static_cast<int>(line.size()) + 1, "missing ':'");
    const std::string label = trim(line.substr(6, colon - 6));
    if (label.empty()) grammar_error(no, 7, "missing character label");
    script.characters.push_back(label);
    script.commands.push_back(parse_order_list(line.substr(colon + 1), no));
  }
  return script;
}

RevisedScript validate_and_revise(const CommandScript& script, const std::vector<std::string>& known_objects) {
  const std::set<std::string> known(known_objects.begin(), known_objects.end());

  RevisedScript out;
  out.script.characters = script.characters;
  out.script.commands.resize(script.commands.size());

  for (std::size_t c = 0; c < script.commands.size(); ++c) {
    for (std::size_t i = 0; i < script.commands[c].size(); ++i) {
      const Command& cmd = script.commands[c][i];
      Command kept = cmd;
      bool drop = false;
      std::string warning;

      switch (cmd.kind) {
        case CommandKind::Invalid:
          if (cmd.invalid_reason == InvalidReason::UnknownMotionType) {
            drop = true;
            warning = "unknown motion type in '" + cmd.raw + "'; command dropped";
          } else {
            kept = Command{};  // idle locomotion
            warning = "malformed token '" + cmd.raw + "' replaced with idle locomotion";
          }
          break;
        case CommandKind::Locomotion:
          if (cmd.target && !known.count(*cmd.target)) {
            warning = "unknown object '" + *cmd.target + "'; locomotion made idle";
            kept = Command{};
          }
          break;
        case CommandKind::SceneInteraction:
          if (!known.count(*cmd.object)) {
            warning = "unknown object '" + *cmd.object + "'; interaction replaced with idle locomotion";
            kept = Command{};
          }
          break;
        case CommandKind::Hhi:
          break;
      }

      if (!warning.empty()) {
        out.warnings.push_back({static_cast<int>(c), static_cast<int>(i), warning});
      }
      if (!drop) out.script.commands[c].push_back(std::move(kept));
    }
  }

  // Two-character scripts must agree on the number of shared interactions;
  // drop the trailing extras from whichever side has more.
  if (out.script.commands.size() == 2) {
    auto& a = out.script.commands[0];
    auto& b = out.script.commands[1];
    while (hhi_count(a) != hhi_count(b)) {
      const bool a_longer = hhi_count(a) > hhi_count(b);
      auto& longer = a_longer ? a : b;
      for (int i = static_cast<int>(longer.size()) - 1; i >= 0; --i) {
        if (longer[static_cast<std::size_t>(i)].kind == CommandKind::Hhi) {
          out.warnings.push_back({a_longer ? 0 : 1, i,
                                  "unpaired interaction '" + longer[static_cast<std::size_t>(i)].hhi_text +
                                      "' removed"});
          longer.erase(longer.begin() + i);
          break;
        }
      }
    }
  }
  return out;
}

DistributedQueues distribute(const CommandScript& script) {
  DistributedQueues q;
  q.characters = script.characters;
  const std::size_t n = script.commands.size();
  q.locomotion.resize(n);
  q.scene_interaction.resize(n);

  std::vector<std::vector<std::pair<int, std::string>>> hhi_per_char(n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < script.commands[c].size(); ++i) {
      const Command& cmd = script.commands[c][i];
      const int seq = static_cast<int>(i);
      switch (cmd.kind) {
        case CommandKind::Locomotion:
          q.locomotion[c].push_back({seq, cmd});
          break;
        case CommandKind::SceneInteraction:
          q.scene_interaction[c].push_back({seq, cmd});
          break;
        case CommandKind::Hhi:
          hhi_per_char[c].emplace_back(seq, cmd.hhi_text);
          break;
        case CommandKind::Invalid:
          throw Error(Errc::BadParams, "scripts must be revised before distribution");
      }
    }
  }

  for (std::size_t c = 1; c < n; ++c) {
    if (hhi_per_char[c].size() != hhi_per_char[0].size()) {
      throw Error(Errc::HhiCountMismatch, "characters disagree on shared interaction count");
    }
  }
  const std::size_t shared_count = n == 0 ? 0 : hhi_per_char[0].size();
  for (std::size_t k = 0; k < shared_count; ++k) {
    HhiItem item;
    for (std::size_t c = 0; c < n; ++c) {
      item.seq.push_back(hhi_per_char[c][k].first);
      item.text.push_back(hhi_per_char[c][k].second);
    }
    q.shared.push_back(std::move(item));
  }
  return q;
}

CommandScript merge_queues(const DistributedQueues& queues) {
  CommandScript script;
  script.characters = queues.characters;
  const std::size_t n = queues.characters.size();
  if (queues.locomotion.size() != n || queues.scene_interaction.size() != n) {
    throw Error(Errc::LengthMismatch, "queue lists do not match the character count");
  }
  script.commands.resize(n);

  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t total =
        queues.locomotion[c].size() + queues.scene_interaction[c].size() + queues.shared.size();
    std::vector<Command> commands(total);
    std::vector<bool> filled(total, false);

    auto place = [&](int seq, Command cmd) {
      if (seq < 0 || seq >= static_cast<int>(total) || filled[static_cast<std::size_t>(seq)]) {
        throw Error(Errc::BadParams, "queue positions do not form a contiguous script");
      }
      commands[static_cast<std::size_t>(seq)] = std::move(cmd);
      filled[static_cast<std::size_t>(seq)] = true;
    };

    for (const auto& item : queues.locomotion[c]) place(item.seq, item.command);
    for (const auto& item : queues.scene_interaction[c]) place(item.seq, item.command);
    for (const auto& item : queues.shared) {
      if (item.seq.size() != n || item.text.size() != n) {
        throw Error(Errc::LengthMismatch, "shared interaction does not cover every character");
      }
      Command cmd;
      cmd.kind = CommandKind::Hhi;
      cmd.hhi_text = item.text[c];
      cmd.raw = "HHI: " + item.text[c];
      place(item.seq[c], std::move(cmd));
    }
    script.commands[c] = std::move(commands);
  }
  return script;
}

std::string write_queues_text(const DistributedQueues& queues) {
  std::string text;
  for (std::size_t c = 0; c < queues.characters.size(); ++c) {
    for (const auto& item : queues.locomotion[c]) {
      text += "char=" + queues.characters[c] + " queue=locomotion seq=" + std::to_string(item.seq) +
              " command=" + command_to_string(item.command) + "\n";
    }
    for (const auto& item : queues.scene_interaction[c]) {
      text += "char=" + queues.characters[c] + " queue=scene seq=" + std::to_string(item.seq) +
              " command=" + command_to_string(item.command) + "\n";
    }
  }
  for (std::size_t k = 0; k < queues.shared.size(); ++k) {
    text += "shared=" + std::to_string(k);
    for (std::size_t c = 0; c < queues.characters.size(); ++c) {
      text += " seq_" + queues.characters[c] + "=" + std::to_string(queues.shared[k].seq[c]);
    }
    text += " text=" + queues.shared[k].text[0] + "\n";
  }
  return text;
}

std::vector<std::string> SceneCatalog::names() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& obj : objects) {
    if (seen.insert(obj.name).second) out.push_back(obj.name);
  }
  return out;
}

SceneCatalog load_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);

  SceneCatalog catalog;
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::istringstream row(t);
    CatalogObject obj;
    if (!(row >> obj.name >> obj.bmin.x() >> obj.bmin.y() >> obj.bmin.z() >> obj.bmax.x() >>
          obj.bmax.y() >> obj.bmax.z())) {
      throw Error(Errc::ParseError, "bad catalog line " + std::to_string(no));
    }
    if ((obj.bmax.array() < obj.bmin.array()).any()) {
      throw Error(Errc::ParseError, "inverted bounds on catalog line " + std::to_string(no));
    }
    catalog.objects.push_back(std::move(obj));
  }
  return catalog;
}

NavGrid load_navgrid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);

  auto next_token = [&in]() {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw Error(Errc::ParseError, "truncated bitmap");
  };

  if (next_token() != "P1") throw Error(Errc::ParseError, "bitmap must start with P1");
  NavGrid grid;
  try {
    grid.width = std::stoi(next_token());
    grid.height = std::stoi(next_token());
  } catch (const std::exception&) {
    throw Error(Errc::ParseError, "bad bitmap dimensions");
  }
  if (grid.width <= 0 || grid.height <= 0) throw Error(Errc::ParseError, "bad bitmap dimensions");

  grid.walkable.resize(static_cast<std::size_t>(grid.width) * grid.height);
  for (auto& cell : grid.walkable) {
    const std::string tok = next_token();
    if (tok == "0") {
      cell = 0;
    } else if (tok == "1") {
      cell = 1;
    } else {
      throw Error(Errc::ParseError, "bitmap cells must be 0 or 1");
    }
  }

  std::ifstream meta(path + ".meta");
  if (!meta) throw Error(Errc::IoError, "cannot open " + path + ".meta");
  std::string line;
  bool have_ox = false, have_oy = false, have_res = false;
  while (std::getline(meta, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) throw Error(Errc::ParseError, "meta lines must be key=value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    try {
      if (key == "origin_x") {
        grid.origin.x() = std::stod(value);
        have_ox = true;
      } else if (key == "origin_y") {
        grid.origin.y() = std::stod(value);
        have_oy = true;
      } else if (key == "resolution") {
        grid.resolution = std::stod(value);
        have_res = true;
      } else {
        throw Error(Errc::ParseError, "unknown meta key '" + key + "'");
      }
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw Error(Errc::ParseError, "bad meta value for '" + key + "'");
    }
  }
  if (!have_ox || !have_oy || !have_res) {
    throw Error(Errc::ParseError, "meta must define origin_x, origin_y and resolution");
  }
  if (grid.resolution <= 0.0) throw Error(Errc::ParseError, "resolution must be positive");
  return grid;
}

void save_navgrid(const NavGrid& grid, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot open " + path + " for writing");
  out << "P1\n" << grid.width << ' ' << grid.height << '\n';
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      out << (grid.cell(x, y) ? '1' : '0') << (x + 1 == grid.width ? '\n' : ' ');
    }
  }
  if (!out) throw Error(Errc::IoError, "write failed for " + path);

  std::ofstream meta(path + ".meta");
  if (!meta) throw Error(Errc::IoError, "cannot open " + path + ".meta for writing");
  meta << "origin_x=" << grid.origin.x() << "\norigin_y=" << grid.origin.y() << "\nresolution="
       << grid.resolution << "\n";
  if (!meta) throw Error(Errc::IoError, "write failed for " + path + ".meta");
}

Eigen::Vector2d sample_route_point(const SceneCatalog& catalog, const NavGrid& grid,
                                   const std::optional<std::string>& target, Rng& rng) {
  std::vector<int> walkable_cells;
  for (int i = 0; i < static_cast<int>(grid.walkable.size()); ++i) {
    if (grid.walkable[static_cast<std::size_t>(i)]) walkable_cells.push_back(i);
  }
  if (walkable_cells.empty()) throw Error(Errc::NoWalkableCell, "grid holds no walkable cell");

  if (!target) {
    const int pick = walkable_cells[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(walkable_cells.size()) - 1))];
    return grid.cell_center(pick % grid.width, pick / grid.width);
  }

  std::vector<const CatalogObject*> matches;
  for (const auto& obj : catalog.objects) {
    if (obj.name == *target) matches.push_back(&obj);
  }
  if (matches.empty()) throw Error(Errc::BadParams, "object '" + *target + "' is not in the catalog");
  const CatalogObject* obj =
      matches[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(matches.size()) - 1))];

  double margin = 0.5;
  constexpr int kMaxAttempts = 64;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    if (attempt > 0 && attempt % 8 == 0) margin *= 1.5;
    Eigen::Vector2d p;
    p.x() = rng.uniform(obj->bmin.x() - margin, obj->bmax.x() + margin);
    p.y() = rng.uniform(obj->bmin.y() - margin, obj->bmax.y() + margin);
    if (grid.walkable_at(p)) return p;
  }
  throw Error(Errc::Unreachable, "no walkable point near '" + *target + "'");
}

}  // namespace mkit
