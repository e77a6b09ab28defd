#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vpvn/crypto/entropy.hpp"
#include "vpvn/crypto/key_file.hpp"
#include "vpvn/crypto/keys.hpp"
#include "vpvn/enet/net.hpp"
#include "vpvn/enet/net_file.hpp"
#include "vpvn/error.hpp"
#include "vpvn/model/conformance.hpp"
#include "vpvn/model/envpvn.hpp"
#include "vpvn/sim/simulator.hpp"

namespace fs = std::filesystem;
using namespace vpvn;

namespace {

constexpr int kOk = 0;
constexpr int kDomainFailure = 1;
constexpr int kInputError = 2;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string file_safe(std::string name) {
  for (char& c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  }
  return name;
}

// run

struct RunArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_run(const RunArgs& a) {
  sim::Scenario scenario;
  try {
    scenario = sim::parse_scenario(slurp(a.scenario));
  } catch (const Error& e) {
    std::cerr << "vpvn: " << to_string(e.code()) << ": " << e.what() << '\n';
    return kInputError;
  }
  if (a.seed) scenario.topology.seed = *a.seed;
  sim::SimulationReport report = sim::run_scenario(scenario);

  bool balanced = true;
  for (const sim::LegReport& leg : report.legs) {
    balanced = balanced && leg.forward.balanced() && leg.reverse.balanced();
  }
  for (std::size_t i = 0; i < report.sessions.size(); ++i) {
    const sim::SessionOutcome& s = report.sessions[i];
    std::cout << s.name << ": " << s.initiator << " -> " << s.responder << ' '
              << sim::to_string(s.status) << ", " << s.frames_delivered << '/' << s.frames_offered
              << " frames delivered\n";
    for (std::size_t li : s.legs) {
      const sim::LegReport& leg = report.legs[li];
      std::cout << "  " << model::format_session_id(leg.session_id) << ' ' << leg.initiator
                << " -> " << leg.responder << ": "
                << (leg.verdict ? model::describe(*leg.verdict) : "skipped (" + leg.skip_reason + ")")
                << '\n';
    }
  }
  if (!a.out.empty()) {
    fs::path dir(a.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    try {
      for (std::size_t i = 0; i < report.sessions.size(); ++i) {
        spit(dir / ("session_" + std::to_string(i + 1) + "_" + file_safe(report.sessions[i].name) +
                    ".log"),
             model::format_log(report.session_log(i)));
      }
      spit(dir / "report.txt", report.render());
    } catch (const std::exception& e) {
      std::cerr << "vpvn: " << e.what() << '\n';
      return kDomainFailure;
    }
  }
  if (!balanced) std::cerr << "vpvn: delivery counters do not balance\n";
  return report.conformant() && balanced ? kOk : kDomainFailure;
}

// enet

struct EnetArgs {
  std::string net;
  std::string resolver;
  std::size_t max_steps = 1000;
  std::int64_t frames = 1;
};

int decision(const std::string& word) {
  if (word == "ok" || word == "rekey" || word == "end" || word == "1") return 1;
  if (word == "fail" || word == "nokey" || word == "continue" || word == "0") return 0;
  throw InputError("unknown resolver word " + word);
}

enet::Resolver script_resolver(const std::string& spec) {
  auto words = std::make_shared<std::vector<int>>();
  std::stringstream in(spec);
  for (std::string w; std::getline(in, w, ',');) {
    if (!w.empty()) words->push_back(decision(w));
  }
  auto next = std::make_shared<std::size_t>(0);
  return [words, next](std::string_view, const enet::Token&) -> std::optional<int> {
    if (*next >= words->size()) return std::nullopt;
    return (*words)[(*next)++];
  };
}

enet::Net load_net(const std::string& name, enet::Token& seed) {
  if (name == "envpvn") {
    return model::vpvn_net();
  }
  seed = {};
  return enet::build_net(enet::parse_net_text(slurp(name)), {});
}

int cmd_enet_run(const EnetArgs& a) {
  model::SessionToken session;
  session.requester = "initiator";
  session.peer = "responder";
  session.session = "0000000000000001";
  session.frames_remaining = a.frames;
  enet::Token seed = model::to_token(session);
  enet::Net net = load_net(a.net, seed);
  enet::Resolver resolver = a.resolver.empty() ? (a.net == "envpvn" ? model::vpvn_resolver() : nullptr)
                                               : script_resolver(a.resolver);
  enet::RunResult result = enet::run(net, net.initial_marking(seed), resolver, a.max_steps);
  for (const enet::FiringRecord& r : result.trace) std::cout << enet::format_record(r) << '\n';
  return kOk;
}

int cmd_enet_reach(const EnetArgs& a) {
  enet::Token seed;
  enet::Net net = load_net(a.net, seed);
  std::cout << enet::reachable_markings(net).size() << '\n';
  return kOk;
}

// conform

int cmd_conform(const std::string& path, bool prefix) {
  model::EventLog log;
  try {
    log = model::parse_log(slurp(path));
  } catch (const Error& e) {
    std::cerr << "vpvn: " << to_string(e.code()) << ": " << e.what() << '\n';
    return kInputError;
  }
  auto mode = prefix ? model::CheckMode::kPrefix : model::CheckMode::kComplete;
  if (log.empty()) {
    model::Verdict v = model::conformance_check(log, mode);
    std::cout << "(empty) " << model::describe(v) << '\n';
    return v.accepted ? kOk : kDomainFailure;
  }
  bool all = true;
  for (const auto& [session, events] : model::split_by_session(log)) {
    model::Verdict v = model::conformance_check(events, mode);
    std::cout << model::format_session_id(session) << ' ' << model::describe(v) << '\n';
    all = all && v.accepted;
  }
  return all ? kOk : kDomainFailure;
}

// keygen

struct KeygenArgs {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string name = "subscriber";
};

int cmd_keygen(const KeygenArgs& a) {
  fs::path dir(a.out);
  if (!fs::is_directory(dir)) {
    std::cerr << "vpvn: output directory " << a.out << " does not exist\n";
    return kDomainFailure;
  }
  crypto::KeyPair pair;
  if (a.seed) {
    crypto::SeededEntropy entropy(*a.seed, "keygen/" + a.name);
    pair = crypto::gen_keypair(entropy);
  } else {
    crypto::SystemEntropy entropy;
    pair = crypto::gen_keypair(entropy);
  }
  try {
    crypto::write_file(dir / (a.name + ".key"), crypto::encode_private_key_file(pair));
    crypto::write_file(dir / (a.name + ".pub"), crypto::encode_public_key_file(pair.public_point));
  } catch (const std::exception& e) {
    std::cerr << "vpvn: " << e.what() << '\n';
    return kDomainFailure;
  }
  std::cout << (dir / (a.name + ".key")).string() << '\n' << (dir / (a.name + ".pub")).string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VPVN simulator and model tools"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "simulate a scenario file");
  run->add_option("scenario", run_args.scenario, "scenario JSON")->required();
  run->add_option("--seed", run_args.seed, "override the scenario seed");
  run->add_option("--out", run_args.out, "directory for session logs and report");

  EnetArgs enet_args;
  auto* enet_cmd = app.add_subcommand("enet", "step or explore an E-net");
  enet_cmd->require_subcommand(1);
  auto* enet_run = enet_cmd->add_subcommand("run", "print the firing trace");
  auto* enet_reach = enet_cmd->add_subcommand("reach", "count reachable markings");
  for (auto* c : {enet_run, enet_reach}) {
    c->add_option("net", enet_args.net, "net file, or envpvn for the built-in model")->required();
  }
  enet_run->add_option("--resolver", enet_args.resolver,
                       "comma-separated decisions: ok|fail, rekey|nokey, end|continue");
  enet_run->add_option("--max-steps", enet_args.max_steps, "step limit");
  enet_run->add_option("--frames", enet_args.frames, "frames carried by the envpvn token");

  std::string log_path;
  bool prefix = false;
  auto* conform = app.add_subcommand("conform", "check an event log against the model");
  conform->add_option("log", log_path, "event log")->required();
  conform->add_flag("--prefix", prefix, "accept logs that stop mid-session");

  KeygenArgs keygen_args;
  auto* keygen = app.add_subcommand("keygen", "generate a subscriber key pair");
  keygen->add_option("--seed", keygen_args.seed, "deterministic generation");
  keygen->add_option("--out", keygen_args.out, "output directory")->required();
  keygen->add_option("--name", keygen_args.name, "file stem");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*enet_run) return cmd_enet_run(enet_args);
    if (*enet_reach) return cmd_enet_reach(enet_args);
    if (*conform) return cmd_conform(log_path, prefix);
    if (*keygen) return cmd_keygen(keygen_args);
  } catch (const InputError& e) {
    std::cerr << "vpvn: " << e.what() << '\n';
    return kInputError;
  } catch (const enet::NetDefinitionError& e) {
    std::cerr << "vpvn: " << e.what() << '\n';
    return kInputError;
  } catch (const Error& e) {
    std::cerr << "vpvn: " << to_string(e.code()) << ": " << e.what() << '\n';
    bool input = e.code() == Errc::kMalformed || e.code() == Errc::kSchemaError;
    return input ? kInputError : kDomainFailure;
  }
  return kInputError;
}
