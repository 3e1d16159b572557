// Copyright (c) 2026 The fdsv authors.
// Distributed under the MIT license; see the LICENSE file.
//
// fdsv: memory-safety verifier for single-pass heap programs over
// forest data-structures.
//
//   fdsv verify <file>...    analyze programs and report verdicts
//   fdsv oracle <file>       differential-test a program against the
//                            concrete heap semantics on random forests
//   fdsv bench <dir>         run a corpus directory and print a table
//
// Exit codes: 0 memory-safe, 1 memory-unsafe, 2 not streaming-coherent,
// 3 assertion violated / resource exceeded, 64+ usage or input errors.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fds/cfa.hpp"
#include "fds/fixpoint.hpp"
#include "fds/heap.hpp"
#include "fds/parser.hpp"
#include "fds/term.hpp"

using json = nlohmann::json;
using namespace fds;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Program load(const std::string& path) {
  Program p = parse_program(slurp(path),
                            std::filesystem::path(path).filename().string());
  validate(p);
  return p;
}

int verdict_exit_code(VerdictKind k) {
  switch (k) {
    case VerdictKind::MemorySafe: return 0;
    case VerdictKind::MemoryUnsafe: return 1;
    case VerdictKind::NotStreamingCoherent: return 2;
    case VerdictKind::AssertionViolated: return 3;
  }
  return 3;
}

json verdict_json(const Program& p, const std::string& file, const Verdict& v,
                  long ms, bool want_invariants) {
  json j;
  j["file"] = file;
  j["verdict"] = verdict_kind_name(v.kind);
  j["streaming_coherent"] = v.kind != VerdictKind::NotStreamingCoherent;
  j["found_safe"] = v.kind == VerdictKind::MemorySafe;
  j["states"] = v.final_states;
  j["time_ms"] = ms;
  if (!v.trace.empty()) {
    json cx = json::array();
    for (const Stmt& s : v.trace) cx.push_back(stmt_to_string(p.sig, s));
    j["counterexample"] = cx;
  }
  if (want_invariants) {
    json invs = json::array();
    for (const LoopInvariant& inv : v.invariants) {
      json ji;
      ji["loop"] = inv.loop_id;
      ji["guard"] = inv.guard;
      json states = json::array();
      for (const InvariantState& st : inv.states) {
        json js;
        js["equalities"] = st.equalities;
        json ds = json::array();
        for (auto& [a, b] : st.disequalities) ds.push_back({a, b});
        js["disequalities"] = ds;
        js["membership"] = st.membership;
        states.push_back(std::move(js));
      }
      ji["states"] = std::move(states);
      invs.push_back(std::move(ji));
    }
    j["invariants"] = std::move(invs);
  }
  return j;
}

void print_text(const Program& p, const std::string& file, const Verdict& v,
                long ms, bool want_invariants) {
  std::cout << file << ": " << verdict_kind_name(v.kind) << " (states="
            << v.final_states << ", " << ms << " ms)\n";
  if (!v.trace.empty()) {
    std::cout << "  counterexample:\n";
    for (const Stmt& s : v.trace)
      std::cout << "    " << stmt_to_string(p.sig, s) << "\n";
  }
  if (want_invariants) {
    for (const LoopInvariant& inv : v.invariants) {
      std::cout << "  loop " << inv.loop_id << " [" << inv.guard
                << "]: " << inv.states.size() << " disjuncts\n";
      for (const InvariantState& st : inv.states) {
        std::cout << "    {";
        bool first = true;
        for (const auto& cls : st.equalities) {
          std::cout << (first ? "" : ", ");
          first = false;
          for (size_t i = 0; i < cls.size(); ++i)
            std::cout << (i ? " = " : "") << cls[i];
        }
        for (const auto& [a, b] : st.disequalities) {
          std::cout << (first ? "" : ", ") << a << " != " << b;
          first = false;
        }
        for (const auto& [v2, r] : st.membership) {
          std::cout << (first ? "" : ", ") << v2 << " : " << r;
          first = false;
        }
        std::cout << "}\n";
      }
    }
  }
}

struct CommonOpts {
  std::string format = "text";
  long bag_cap = 100000;
  bool emit_invariants = false;
};

int cmd_verify(const std::vector<std::string>& files, const CommonOpts& opts) {
  int worst = 0;
  json all = json::array();
  for (const std::string& file : files) {
    Program p = load(file);
    AnalyzeOptions ao;
    ao.bag_cap = opts.bag_cap;
    ao.want_invariants = opts.emit_invariants;
    auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = analyze(p, ao);
    } catch (const BagCapExceeded& e) {
      std::cerr << file << ": resource exceeded: " << e.what() << "\n";
      return 3;
    }
    long ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    if (opts.format == "json")
      all.push_back(verdict_json(p, file, v, ms, opts.emit_invariants));
    else
      print_text(p, file, v, ms, opts.emit_invariants);
    worst = std::max(worst, verdict_exit_code(v.kind));
  }
  if (opts.format == "json")
    std::cout << (all.size() == 1 ? all[0] : all).dump(2) << "\n";
  return worst;
}

// Differential testing: enumerate prefix executions of the program up to a
// bounded length, keep the streaming-coherent ones, and compare the automaton
// verdict against the concrete semantics over random forest heaps.
int cmd_oracle(const std::string& file, int max_len, int max_heap, int trials,
               uint64_t seed) {
  Program p = load(file);
  Cfa cfa = lower_to_cfa(p);
  std::mt19937_64 rng(seed);

  std::vector<ConcreteForestHeap> heaps;
  for (int i = 0; i < trials; ++i)
    heaps.push_back(random_forest(p.sig, p.spec, max_heap, rng));

  long words = 0, mismatches = 0;
  enumerate_words(cfa, max_len, [&](const std::vector<Stmt>& w) {
    if (!check_streaming_coherent(p.sig, p.spec, w).ok()) return false;
    ++words;
    AnalysisState q = initial_state(p.sig, p.spec);
    for (const Stmt& s : w) q = step(p.sig, p.spec, q, s);
    bool automaton_safe = q.kind != AnalysisState::Kind::Unsafe;
    bool automaton_feasible = q.kind != AnalysisState::Kind::Infeasible;
    bool any_feasible = false, any_violation = false;
    for (const ConcreteForestHeap& h : heaps) {
      ConcreteTrace t = run_execution(p.sig, p.spec, h, w);
      if (t.violation != ViolationKind::None) any_violation = true;
      if (t.feasible) any_feasible = true;
    }
    if (any_violation && automaton_safe) {
      ++mismatches;
      std::cerr << "UNSOUND: concrete violation on safe automaton run\n  "
                << word_to_string(p.sig, w) << "\n";
    }
    if (!automaton_feasible && any_feasible) {
      ++mismatches;
      std::cerr << "UNSOUND: feasible execution judged infeasible\n  "
                << word_to_string(p.sig, w) << "\n";
    }
    return true;
  });
  std::cout << "oracle: " << words << " streaming-coherent prefix executions x "
            << heaps.size() << " heaps, " << mismatches << " mismatches\n";
  return mismatches == 0 ? 0 : 3;
}

int cmd_bench(const std::string& dir, const CommonOpts& opts) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".fds") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    std::cerr << "no .fds files in '" << dir << "'\n";
    return 65;
  }
  json all = json::array();
  long total_ms = 0;
  printf("%-48s %-24s %8s %8s\n", "program", "verdict", "states", "ms");
  for (const auto& path : files) {
    Program p = load(path.string());
    auto t0 = std::chrono::steady_clock::now();
    Verdict v = analyze(p);
    long ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    total_ms += ms;
    if (opts.format == "json") {
      all.push_back(verdict_json(p, path.filename().string(), v, ms, false));
    } else {
      printf("%-48s %-24s %8d %8ld\n", path.filename().string().c_str(),
             verdict_kind_name(v.kind).c_str(), v.final_states, ms);
    }
  }
  if (opts.format == "json")
    std::cout << all.dump(2) << "\n";
  else
    printf("%-48s %-24s %8s %8ld\n", "total", "", "", total_ms);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memory-safety verifier for single-pass forest programs"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::vector<std::string> files;
  auto* verify = app.add_subcommand("verify", "analyze programs");
  verify->add_option("files", files, "program files")->required();
  verify->add_option("--format", opts.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  verify->add_option("--bag-cap", opts.bag_cap, "per-point state cap");
  verify->add_flag("--emit-invariants", opts.emit_invariants,
                   "report loop-head invariants");

  std::string oracle_file;
  int max_len = 10, max_heap = 6, trials = 200;
  uint64_t seed = 1;
  auto* oracle = app.add_subcommand(
      "oracle", "differential-test against the concrete semantics");
  oracle->add_option("file", oracle_file, "program file")->required();
  oracle->add_option("--max-len", max_len, "execution length bound");
  oracle->add_option("--max-heap", max_heap, "forest size bound");
  oracle->add_option("--trials", trials, "random heaps");
  oracle->add_option("--seed", seed, "random seed");

  std::string bench_dir;
  auto* bench = app.add_subcommand("bench", "run a corpus directory");
  bench->add_option("dir", bench_dir, "directory of .fds files")->required();
  bench->add_option("--format", opts.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 64;
  }

  try {
    if (verify->parsed()) return cmd_verify(files, opts);
    if (oracle->parsed())
      return cmd_oracle(oracle_file, max_len, max_heap, trials, seed);
    if (bench->parsed()) return cmd_bench(bench_dir, opts);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 65;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 66;
  }
  return 64;
}
