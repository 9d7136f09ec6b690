// ctclab command-line front end.
//
// Subcommands
//   dctc solve        canonical self-consistent state of a bipartite channel
//   dctc iterate      Cesaro average of the channel orbit from a start state
//   extend run        long-run extension sweep with sampled test operators
//   corr verify       correlation-bound cross-check on a tripartite instance
//   politzer trace    characteristic trace through the glued strip geometry
//   politzer eval     field evaluation at spacetime points
//   politzer region   localization of a region on the initial surface
//   politzer symplectic   symplectic pairing of two fields
//   gibbs scan        thermal scan of a truncated oscillator observable
//
// Each subcommand reads one JSON document per --in (stdin when no --in is
// given) and writes JSON or CSV to the matching --out (stdout when absent).
// Repeating --in runs a batch; --jobs N processes independent items in
// parallel while output keeps input order, so a run is byte-identical for
// any job count.  Batch item i uses seed (--seed + i).
//
// Exit status: 0 success, 1 domain error (contract, solver, truncation,
// critical ray, ambiguity), 2 usage or I/O error.  Every failure prints a
// one-line JSON diagnostic {"error":{"type":...,"message":...}} to stderr.

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "ctclab/correlations.hpp"
#include "ctclab/dctc.hpp"
#include "ctclab/extension.hpp"
#include "ctclab/gibbs.hpp"
#include "ctclab/json_io.hpp"
#include "ctclab/linalg.hpp"
#include "ctclab/politzer.hpp"
#include "ctclab/rng.hpp"

namespace {

using ctclab::ambiguity_error;
using ctclab::CMat;
using ctclab::contract_error;
using ctclab::critical_ray_error;
using ctclab::DensityMatrix;
using ctclab::dimension_error;
using ctclab::io_error;
using ctclab::Rng;
using ctclab::solver_error;
using ctclab::truncation_error;
using ctclab::json_io::json;

// ---------------------------------------------------------------------------
// Formatting and plumbing
// ---------------------------------------------------------------------------

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open input file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw io_error("cannot read input file: " + path);
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open output file: " + path);
  out << text;
  out.flush();
  if (!out) throw io_error("cannot write output file: " + path);
}

void diagnostic(const char* type, const std::string& message) {
  json d{{"error", {{"type", type}, {"message", message}}}};
  std::cerr << d.dump() << "\n";
}

const json& member(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw io_error(std::string("missing member \"") + key + "\"");
  return j.at(key);
}

double number_or(const json& j, const char* key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw io_error(std::string("member \"") + key +
                                     "\" must be a number");
  return v.get<double>();
}

long integer_or(const json& j, const char* key, long fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer())
    throw io_error(std::string("member \"") + key + "\" must be an integer");
  return v.get<long>();
}

// Per-item context handed to a subcommand worker.
struct RunCtx {
  std::uint64_t seed = 12345;
  double tol = 0.0;  // 0 means "not set on the command line"
};

struct Shared {
  std::uint64_t seed = 12345;
  double tol = 0.0;
  int jobs = 1;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

using Worker = std::function<std::string(const json&, const RunCtx&)>;

// Runs the worker over every input item, in parallel when asked, and emits
// the results strictly in input order.
int run_batch(const Shared& sh, const Worker& worker) {
  std::vector<std::string> inputs = sh.inputs;
  if (inputs.empty()) inputs.push_back("-");
  if (!sh.outputs.empty() && sh.outputs.size() != inputs.size())
    throw io_error("need exactly one --out per --in (or none at all)");

  const std::size_t n = inputs.size();
  std::vector<std::string> texts(n);
  for (std::size_t i = 0; i < n; ++i) texts[i] = read_input(inputs[i]);

  std::vector<std::string> results(n);
  std::vector<std::exception_ptr> failures(n);

  auto runItem = [&](std::size_t i) {
    try {
      RunCtx ctx;
      ctx.seed = sh.seed + static_cast<std::uint64_t>(i);
      ctx.tol = sh.tol;
      results[i] = worker(ctclab::json_io::parse(texts[i]), ctx);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  };

  const int jobs =
      std::max(1, std::min<int>(sh.jobs, static_cast<int>(n)));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) runItem(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int w = 0; w < jobs; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
          runItem(i);
      });
    for (auto& t : pool) t.join();
  }

  // Report the first failure by input order so behavior ignores scheduling.
  for (std::size_t i = 0; i < n; ++i)
    if (failures[i]) std::rethrow_exception(failures[i]);

  for (std::size_t i = 0; i < n; ++i)
    write_output(sh.outputs.empty() ? std::string() : sh.outputs[i],
                 results[i]);
  return 0;
}

// ---------------------------------------------------------------------------
// Shared payload helpers
// ---------------------------------------------------------------------------

DensityMatrix density_payload(const json& j, const char* what) {
  try {
    return DensityMatrix(ctclab::json_io::matrix_from_json(j));
  } catch (const io_error&) {
    throw;
  } catch (const contract_error& e) {
    throw io_error(std::string(what) + " payload rejected: " + e.what());
  }
}

std::vector<long> step_list(const json& j) {
  if (!j.is_array() || j.empty())
    throw io_error("\"steps\" must be a non-empty array of integers");
  std::vector<long> steps;
  steps.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number_integer())
      throw io_error("\"steps\" must be a non-empty array of integers");
    steps.push_back(v.get<long>());
  }
  return steps;
}

ctclab::politzer::Chirality chirality_payload(const json& j) {
  const std::string s = member(j, "chirality").is_string()
                            ? j.at("chirality").get<std::string>()
                            : std::string();
  if (s == "right") return ctclab::politzer::Chirality::Right;
  if (s == "left") return ctclab::politzer::Chirality::Left;
  throw io_error("\"chirality\" must be \"right\" or \"left\"");
}

json intervals_to_json(const std::vector<ctclab::politzer::SurfaceInterval>& v) {
  json arr = json::array();
  for (const auto& iv : v) arr.push_back({{"lo", iv.lo}, {"hi", iv.hi}});
  return arr;
}

// ---------------------------------------------------------------------------
// Subcommand workers
// ---------------------------------------------------------------------------

std::string run_dctc_solve(const json& in, const RunCtx& ctx) {
  const auto ch = ctclab::json_io::channel_from_json(in);
  const double tol = ctx.tol > 0.0 ? ctx.tol : 1e-10;
  const auto res = ctclab::dctc::solve_fixed_points(ch, tol);
  json out{{"canonical", ctclab::json_io::matrix_to_json(res.canonical.mat())},
           {"residual", res.residual},
           {"subspaceDimension", res.subspaceDimension},
           {"iterations", res.iterations}};
  return ctclab::json_io::dump(out);
}

std::string run_dctc_iterate(const json& in, const RunCtx& ctx, long steps) {
  (void)ctx;
  const auto ch = ctclab::json_io::channel_from_json(in);
  const DensityMatrix b0 =
      in.contains("initialB")
          ? density_payload(in.at("initialB"), "initialB")
          : ctclab::maximally_mixed(ch.space.dimB);
  const auto [avg, residual] = ctclab::dctc::cesaro_average(ch, b0, steps);
  json out{{"average", ctclab::json_io::matrix_to_json(avg.mat())},
           {"residual", residual},
           {"steps", steps}};
  return ctclab::json_io::dump(out);
}

std::string run_extend(const json& in, const RunCtx& ctx) {
  const auto ch = ctclab::json_io::channel_from_json(member(in, "channel"));
  const std::vector<long> steps = step_list(member(in, "steps"));
  const long samples = integer_or(in, "samples", 20);
  const double radius = number_or(in, "radius", 1.0);
  if (samples < 1) throw io_error("\"samples\" must be at least 1");
  if (!(radius > 0.0)) throw io_error("\"radius\" must be positive");
  const DensityMatrix seedB =
      in.contains("initialB")
          ? density_payload(in.at("initialB"), "initialB")
          : ctclab::maximally_mixed(ch.space.dimB);

  // The test operators are drawn once, so every row sees the same family.
  Rng rng(ctx.seed);
  std::vector<CMat> bs;
  bs.reserve(static_cast<std::size_t>(samples));
  for (long s = 0; s < samples; ++s) {
    CMat b = rng.ginibre(ch.space.dimB, ch.space.dimB);
    const double nrm = ctclab::operator_norm(b);
    if (nrm > 0.0) b *= radius / nrm;
    bs.push_back(std::move(b));
  }

  std::string csv = "steps,maxDeviation,maxTelescoped,bound,marginalResidual\n";
  for (long n : steps) {
    const auto st = ctclab::extension::run_extension(ch.U, ch.rhoA, seedB, n);
    double maxDev = 0.0, maxTel = 0.0, bound = 0.0;
    for (const CMat& b : bs) {
      maxDev = std::max(maxDev,
                        ctclab::extension::invariance_deviation(st, ch.U, b));
      maxTel = std::max(
          maxTel, ctclab::extension::invariance_deviation_telescoped(st, b));
      bound = std::max(bound, ctclab::extension::deviation_bound(st, b));
    }
    const double marg = ctclab::trace_norm(
        ctclab::extension::marginal(st, ctclab::Subsystem::A) -
        ch.rhoA.mat());
    csv += std::to_string(n) + "," + fmt17(maxDev) + "," + fmt17(maxTel) +
           "," + fmt17(bound) + "," + fmt17(marg) + "\n";
  }
  return csv;
}

std::string run_corr(const json& in, const RunCtx& ctx, int grid,
                     int randomPairs) {
  const auto inst = ctclab::json_io::instance_from_json(in);
  const auto pairs =
      ctclab::correlations::default_pairs(inst.dims, ctx.seed, randomPairs);
  const auto rep = ctclab::correlations::verify_lemma(inst, pairs, grid);
  json out{{"minQ", rep.minQ},
           {"minK", rep.minK},
           {"finite", rep.finite},
           {"invarianceDefect", rep.invarianceDefect},
           {"discrepancy", rep.discrepancy},
           {"grid", grid},
           {"pairs", static_cast<long>(pairs.size())}};
  return ctclab::json_io::dump(out);
}

std::string run_politzer_trace(const json& in, const RunCtx& ctx) {
  (void)ctx;
  const auto g =
      ctclab::json_io::geometry_from_json(member(in, "geometry"));
  const auto ch = chirality_payload(in);
  const json& pt = member(in, "point");
  const double t = member(pt, "t").get<double>();
  const double x = member(pt, "x").get<double>();
  const double target = member(in, "target").get<double>();
  std::string direction = "backward";
  if (in.contains("direction")) {
    if (!in.at("direction").is_string())
      throw io_error("\"direction\" must be \"backward\" or \"forward\"");
    direction = in.at("direction").get<std::string>();
  }
  ctclab::politzer::TraceResult tr;
  if (direction == "backward")
    tr = ctclab::politzer::trace_backward(g, ch, t, x, target);
  else if (direction == "forward")
    tr = ctclab::politzer::trace_forward(g, ch, t, x, target);
  else
    throw io_error("\"direction\" must be \"backward\" or \"forward\"");

  json events = json::array();
  for (const auto& ev : tr.events) {
    const char* action =
        ev.action == ctclab::politzer::CrossingAction::Wrap   ? "wrap"
        : ev.action == ctclab::politzer::CrossingAction::Jump ? "jump"
                                                              : "free";
    events.push_back({{"line", ev.line},
                      {"x", ev.xCross},
                      {"action", action},
                      {"shift", ev.shift}});
  }
  json out{{"chirality",
            tr.chirality == ctclab::politzer::Chirality::Right ? "right"
                                                               : "left"},
           {"start", tr.start},
           {"effective", tr.effective},
           {"wraps", tr.wraps},
           {"jumps", tr.jumps},
           {"events", events}};
  return ctclab::json_io::dump(out);
}

std::string run_politzer_eval(const json& in, const RunCtx& ctx) {
  (void)ctx;
  const auto f = ctclab::json_io::field_from_json(member(in, "field"));
  const json& pts = member(in, "points");
  if (!pts.is_array() || pts.empty())
    throw io_error("\"points\" must be a non-empty array");
  json values = json::array();
  json derivatives = json::array();
  for (const auto& pt : pts) {
    const double t = member(pt, "t").get<double>();
    const double x = member(pt, "x").get<double>();
    values.push_back(ctclab::politzer::evaluate(f, t, x));
    derivatives.push_back(ctclab::politzer::evaluate_dt(f, t, x));
  }
  json out{{"values", values}, {"timeDerivatives", derivatives}};
  return ctclab::json_io::dump(out);
}

std::string run_politzer_region(const json& in, const RunCtx& ctx) {
  (void)ctx;
  const auto g =
      ctclab::json_io::geometry_from_json(member(in, "geometry"));
  const double t0 = member(in, "initialTime").get<double>();
  const auto region = ctclab::json_io::region_from_json(member(in, "region"));
  const auto loc = ctclab::politzer::localize(g, t0, region);
  json out{{"right", intervals_to_json(loc.right)},
           {"left", intervals_to_json(loc.left)}};
  if (in.contains("field") && in.contains("compare")) {
    const auto f = ctclab::json_io::field_from_json(in.at("field"));
    const auto other = ctclab::json_io::region_from_json(in.at("compare"));
    const long samples = integer_or(in, "samples", 101);
    if (samples < 2) throw io_error("\"samples\" must be at least 2");
    const auto cmp = ctclab::politzer::regions_equal(
        f, region, other, static_cast<int>(samples));
    out["comparison"] = {{"equal", cmp.equal},
                         {"maxDeviation", cmp.maxDeviation}};
  }
  return ctclab::json_io::dump(out);
}

std::string run_politzer_symplectic(const json& in, const RunCtx& ctx) {
  const auto f = ctclab::json_io::field_from_json(member(in, "first"));
  const auto g = ctclab::json_io::field_from_json(member(in, "second"));
  const double surface = member(in, "surface").get<double>();
  const double quadTol =
      ctx.tol > 0.0 ? ctx.tol : number_or(in, "quadTol", 1e-10);
  const double sigma =
      ctclab::politzer::symplectic_form(f, g, surface, quadTol);
  json out{{"sigma", sigma}, {"surface", surface}};
  return ctclab::json_io::dump(out);
}

ctclab::gibbs::FiniteRankObservable observable_payload(const json& j) {
  const json& kindNode = member(j, "kind");
  if (!kindNode.is_string()) throw io_error("\"kind\" must be a string");
  const std::string kind = kindNode.get<std::string>();
  try {
    if (kind == "level")
      return ctclab::gibbs::FiniteRankObservable::level_projector(
          static_cast<int>(member(j, "k").get<long>()));
    if (kind == "segment")
      return ctclab::gibbs::FiniteRankObservable::segment_projector(
          static_cast<int>(member(j, "k").get<long>()));
    if (kind == "identity")
      return ctclab::gibbs::FiniteRankObservable::identity();
    if (kind == "custom")
      return ctclab::gibbs::FiniteRankObservable(
          static_cast<int>(member(j, "levels").get<long>()),
          ctclab::json_io::matrix_from_json(member(j, "block")),
          number_or(j, "identityCoefficient", 0.0));
  } catch (const io_error&) {
    throw;
  } catch (const contract_error& e) {
    throw io_error(std::string("observable payload rejected: ") + e.what());
  }
  throw io_error(
      "\"kind\" must be \"level\", \"segment\", \"identity\" or \"custom\"");
}

std::string run_gibbs(const json& in, const RunCtx& ctx) {
  (void)ctx;
  const auto obs = observable_payload(member(in, "observable"));
  const json& betasNode = member(in, "betas");
  if (!betasNode.is_array() || betasNode.empty())
    throw io_error("\"betas\" must be a non-empty array of numbers");
  std::vector<double> betas;
  betas.reserve(betasNode.size());
  for (const auto& b : betasNode) {
    if (!b.is_number())
      throw io_error("\"betas\" must be a non-empty array of numbers");
    betas.push_back(b.get<double>());
  }
  const auto rows = ctclab::gibbs::scan_beta(obs, betas);
  std::string csv =
      "beta,nmax,relativeTail,partitionClosed,partitionPartial,"
      "groundOccupancy,expectation\n";
  for (const auto& r : rows)
    csv += fmt17(r.beta) + "," + std::to_string(r.nmax) + "," +
           fmt17(r.relativeTail) + "," + fmt17(r.partitionClosed) + "," +
           fmt17(r.partitionPartial) + "," + fmt17(r.groundOccupancy) + "," +
           fmt17(r.expectation) + "\n";
  return csv;
}

int dispatch(const Shared& sh, const Worker& worker) {
  try {
    return run_batch(sh, worker);
  } catch (const io_error& e) {
    diagnostic("io_error", e.what());
    return 2;
  } catch (const dimension_error& e) {
    diagnostic("dimension_error", e.what());
    return 1;
  } catch (const contract_error& e) {
    diagnostic("contract_error", e.what());
    return 1;
  } catch (const solver_error& e) {
    diagnostic("solver_error", e.what());
    return 1;
  } catch (const truncation_error& e) {
    diagnostic("truncation_error", e.what());
    return 1;
  } catch (const critical_ray_error& e) {
    diagnostic("critical_ray_error", e.what());
    return 1;
  } catch (const ambiguity_error& e) {
    diagnostic("ambiguity_error", e.what());
    return 1;
  } catch (const std::exception& e) {
    diagnostic("internal_error", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ctclab: closed-timelike-curve numerical laboratory"};
  app.require_subcommand(1);
  app.fallthrough();

  Shared sh;
  app.add_option("--seed", sh.seed, "Base RNG seed (item i uses seed + i)")
      ->capture_default_str();
  app.add_option("--tol", sh.tol,
                 "Solver / quadrature tolerance override (> 0)");
  app.add_option("--jobs", sh.jobs, "Parallel workers for batch inputs")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  app.add_option("--in", sh.inputs,
                 "Input JSON file (repeatable; \"-\" or absent = stdin)");
  app.add_option("--out", sh.outputs,
                 "Output file, one per --in (absent = stdout)");

  Worker selected;

  auto* dctcCmd = app.add_subcommand("dctc", "Self-consistent channel states");
  dctcCmd->require_subcommand(1);
  dctcCmd->fallthrough();

  auto* solveCmd =
      dctcCmd->add_subcommand("solve", "Canonical fixed point of a channel");
  solveCmd->fallthrough();
  solveCmd->callback([&] { selected = run_dctc_solve; });

  long iterateSteps = 1000;
  auto* iterateCmd =
      dctcCmd->add_subcommand("iterate", "Cesaro average of the orbit");
  iterateCmd->fallthrough();
  iterateCmd->add_option("--steps", iterateSteps, "Cesaro iterations (>= 1)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  iterateCmd->callback([&] {
    selected = [&iterateSteps](const json& in, const RunCtx& ctx) {
      return run_dctc_iterate(in, ctx, iterateSteps);
    };
  });

  auto* extendCmd = app.add_subcommand("extend", "Long-run extensions");
  extendCmd->require_subcommand(1);
  extendCmd->fallthrough();
  auto* extendRun =
      extendCmd->add_subcommand("run", "Sweep extension lengths");
  extendRun->fallthrough();
  extendRun->callback([&] { selected = run_extend; });

  auto* corrCmd = app.add_subcommand("corr", "Correlation bounds");
  corrCmd->require_subcommand(1);
  corrCmd->fallthrough();
  int corrGrid = 256;
  int corrPairs = 8;
  auto* corrVerify =
      corrCmd->add_subcommand("verify", "Cross-check both bound routes");
  corrVerify->fallthrough();
  corrVerify->add_option("--grid", corrGrid, "Phase-grid resolution (>= 2)")
      ->check(CLI::Range(2, 1 << 20))
      ->capture_default_str();
  corrVerify
      ->add_option("--pairs", corrPairs, "Random operator samples per side")
      ->check(CLI::Range(0, 4096))
      ->capture_default_str();
  corrVerify->callback([&] {
    selected = [&corrGrid, &corrPairs](const json& in, const RunCtx& ctx) {
      return run_corr(in, ctx, corrGrid, corrPairs);
    };
  });

  auto* politzerCmd =
      app.add_subcommand("politzer", "Glued-strip spacetime fields");
  politzerCmd->require_subcommand(1);
  politzerCmd->fallthrough();
  auto* traceCmd = politzerCmd->add_subcommand(
      "trace", "Trace one characteristic to a target time");
  traceCmd->fallthrough();
  traceCmd->callback([&] { selected = run_politzer_trace; });
  auto* evalCmd =
      politzerCmd->add_subcommand("eval", "Evaluate a field at points");
  evalCmd->fallthrough();
  evalCmd->callback([&] { selected = run_politzer_eval; });
  auto* regionCmd = politzerCmd->add_subcommand(
      "region", "Localize a region on the initial surface");
  regionCmd->fallthrough();
  regionCmd->callback([&] { selected = run_politzer_region; });
  auto* sympCmd = politzerCmd->add_subcommand(
      "symplectic", "Symplectic pairing of two fields");
  sympCmd->fallthrough();
  sympCmd->callback([&] { selected = run_politzer_symplectic; });

  auto* gibbsCmd = app.add_subcommand("gibbs", "Thermal oscillator states");
  gibbsCmd->require_subcommand(1);
  gibbsCmd->fallthrough();
  auto* scanCmd =
      gibbsCmd->add_subcommand("scan", "Scan inverse temperatures");
  scanCmd->fallthrough();
  scanCmd->callback([&] { selected = run_gibbs; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    diagnostic("usage_error", e.what());
    return 2;
  }
  if (sh.tol != 0.0 && !(sh.tol > 0.0)) {
    diagnostic("usage_error", "--tol must be positive");
    return 2;
  }
  if (!selected) {
    diagnostic("usage_error", "no subcommand selected");
    return 2;
  }
  return dispatch(sh, selected);
}
