#include "vpvn/enet/net_file.hpp"

#include <charconv>
#include <sstream>
#include <vector>

namespace vpvn::enet {

namespace {

constexpr std::string_view kAbsorb = "ABSORB";

std::vector<std::string> split_words(std::string_view line) {
  std::vector<std::string> words;
  std::istringstream in{std::string(line)};
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::vector<std::string> split_commas(const std::string& list) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = list.find(',', start);
    std::string item = list.substr(start, comma - start);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw Error(Errc::kMalformed, "line " + std::to_string(line_no) + ": " + what);
}

std::optional<std::string> target(const std::string& word) {
  if (word == kAbsorb) return std::nullopt;
  return word;
}

OutputBranch parse_branch(std::size_t line_no, const std::string& word) {
  std::size_t colon = word.find(':');
  if (colon == std::string::npos) fail(line_no, "branch must be <tag>:<position>");
  int tag = 0;
  std::string_view digits(word.data(), colon);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), tag);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) {
    fail(line_no, "bad branch tag '" + std::string(digits) + "'");
  }
  return {tag, target(word.substr(colon + 1))};
}

TransitionDef parse_transition(std::size_t line_no, const std::vector<std::string>& w) {
  // transition <id> <procedure> in <list> (out <t> | switch <r> <b> <b>)
  if (w.size() < 6 || w[3] != "in") fail(line_no, "expected 'transition <id> <procedure> in ...'");
  TransitionDef t;
  t.id = w[1];
  t.procedure = w[2];
  t.inputs = split_commas(w[4]);
  if (w[5] == "out") {
    if (w.size() != 7) fail(line_no, "expected exactly one output after 'out'");
    t.outputs.push_back({kOnlyBranch, target(w[6])});
  } else if (w[5] == "switch") {
    if (w.size() < 8) fail(line_no, "expected resolver and branches after 'switch'");
    t.resolver = w[6];
    for (std::size_t i = 7; i < w.size(); ++i) t.outputs.push_back(parse_branch(line_no, w[i]));
  } else {
    fail(line_no, "expected 'out' or 'switch', got '" + w[5] + "'");
  }
  return t;
}

}  // namespace

NetDefinition parse_net_text(std::string_view text) {
  NetDefinition def;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  bool named = false;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::vector<std::string> w = split_words(raw);
    if (w.empty()) continue;
    const std::string& key = w[0];
    auto rest = [&w] { return std::vector<std::string>(w.begin() + 1, w.end()); };
    if (key == "net") {
      if (w.size() != 2) fail(line_no, "expected 'net <name>'");
      def.name = w[1];
      named = true;
    } else if (key == "positions") {
      auto r = rest();
      def.positions.insert(def.positions.end(), r.begin(), r.end());
    } else if (key == "peripheral") {
      auto r = rest();
      def.peripheral.insert(def.peripheral.end(), r.begin(), r.end());
    } else if (key == "resolving") {
      auto r = rest();
      def.resolving.insert(def.resolving.end(), r.begin(), r.end());
    } else if (key == "initial") {
      auto r = rest();
      def.initial.insert(def.initial.end(), r.begin(), r.end());
    } else if (key == "transition") {
      def.transitions.push_back(parse_transition(line_no, w));
    } else {
      fail(line_no, "unknown directive '" + key + "'");
    }
  }
  if (!named) throw Error(Errc::kMalformed, "missing 'net <name>' line");
  return def;
}

std::string format_net_text(const NetDefinition& def) {
  std::ostringstream out;
  auto list = [&out](std::string_view key, const std::vector<std::string>& ids) {
    if (ids.empty()) return;
    out << key;
    for (const auto& id : ids) out << ' ' << id;
    out << '\n';
  };
  auto place = [](const std::optional<std::string>& p) {
    return p ? *p : std::string(kAbsorb);
  };
  out << "net " << def.name << '\n';
  list("positions", def.positions);
  list("peripheral", def.peripheral);
  list("resolving", def.resolving);
  list("initial", def.initial);
  for (const TransitionDef& t : def.transitions) {
    out << "transition " << t.id << ' ' << t.procedure << " in ";
    for (std::size_t i = 0; i < t.inputs.size(); ++i) out << (i ? "," : "") << t.inputs[i];
    if (t.resolver) {
      out << " switch " << *t.resolver;
      for (const OutputBranch& b : t.outputs) out << ' ' << b.branch << ':' << place(b.position);
    } else {
      for (const OutputBranch& b : t.outputs) out << " out " << place(b.position);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace vpvn::enet
