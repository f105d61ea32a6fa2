#pragma once

// Experiment driver behind the ridl-noise CLI: resolves graph families,
// evaluates bounds / exact index / simulations over N and p grids, and
// serializes the resulting tables as CSV or JSON.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "ridl/errors.hpp"
#include "ridl/family.hpp"
#include "ridl/graph.hpp"
#include "ridl/noise_index.hpp"
#include "ridl/ridl.hpp"
#include "ridl/rng.hpp"
#include "ridl/simulator.hpp"

namespace ridl {

#ifndef RIDL_NOISE_VERSION
#define RIDL_NOISE_VERSION "0.0.0"
#endif

inline constexpr std::string_view kVersion = RIDL_NOISE_VERSION;

// ---------------------------------------------------------------------------
// Tables

/// Empty cells (monostate) are written as an empty CSV field / JSON null.
using Cell = std::variant<std::monostate, long long, double, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw ValidationError("table has no column \"" + std::string(name) + "\"");
  }

  std::optional<double> number(std::size_t row, std::string_view name) const {
    const Cell& c = rows.at(row).at(column(name));
    if (auto d = std::get_if<double>(&c)) return *d;
    if (auto i = std::get_if<long long>(&c)) return static_cast<double>(*i);
    return std::nullopt;
  }
};

using RowValues = std::map<std::string, Cell, std::less<>>;

inline std::vector<Cell> project(const std::vector<std::string>& columns, const RowValues& values) {
  std::vector<Cell> row;
  row.reserve(columns.size());
  for (const auto& c : columns) {
    auto it = values.find(c);
    row.push_back(it == values.end() ? Cell{} : it->second);
  }
  return row;
}

/// Fixed scientific notation with 12 significant digits.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

inline std::string format_cell(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::string& v) const { return v; }
  };
  return std::visit(Visitor{}, c);
}

inline void write_csv(std::ostream& out, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
    out << '\n';
  }
}

inline nlohmann::ordered_json to_json(const Table& t) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      const Cell& c = row[i];
      if (std::holds_alternative<std::monostate>(c)) obj[t.columns[i]] = nullptr;
      else if (auto v = std::get_if<long long>(&c)) obj[t.columns[i]] = *v;
      else if (auto d = std::get_if<double>(&c)) obj[t.columns[i]] = *d;
      else if (auto b = std::get_if<bool>(&c)) obj[t.columns[i]] = *b;
      else obj[t.columns[i]] = std::get<std::string>(c);
    }
    arr.push_back(std::move(obj));
  }
  return arr;
}

enum class OutputFormat { csv, json };

inline void write_table(std::ostream& out, const Table& t, OutputFormat fmt) {
  if (fmt == OutputFormat::csv) {
    write_csv(out, t);
  } else {
    out << to_json(t).dump(2) << '\n';
  }
}

inline std::string table_to_string(const Table& t, OutputFormat fmt) {
  std::ostringstream os;
  write_table(os, t, fmt);
  return os.str();
}

// ---------------------------------------------------------------------------
// Column schemas

namespace schema {

inline const std::vector<std::string>& graph_columns() {
  static const std::vector<std::string> cols{"family", "n_requested", "n", "dims", "realization",
                                             "graph_seed", "er_attempts"};
  return cols;
}

inline const std::vector<std::string>& bound_columns() {
  static const std::vector<std::string> cols{"p",        "eps",      "k",     "sigma2", "j_lb",    "j_ub",
                                             "j_res_lb", "j_res_ub", "r_ave", "d_max",  "lambda2", "lambdaN"};
  return cols;
}

inline std::vector<std::string> join(std::initializer_list<const std::vector<std::string>*> parts) {
  std::vector<std::string> out;
  for (auto* p : parts) out.insert(out.end(), p->begin(), p->end());
  return out;
}

inline std::vector<std::string> bounds() { return join({&graph_columns(), &bound_columns()}); }

inline std::vector<std::string> exact() {
  static const std::vector<std::string> extra{"j_exact", "rel_lb", "rel_ub"};
  return join({&graph_columns(), &bound_columns(), &extra});
}

inline std::vector<std::string> simulate() {
  static const std::vector<std::string> extra{"j_exact", "j_hat",  "std_error", "converged",
                                              "drift",   "horizon", "ensemble", "noise", "sim_seed"};
  return join({&graph_columns(), &bound_columns(), &extra});
}

inline std::vector<std::string> sweep_n() { return exact(); }

inline std::vector<std::string> sweep_p() {
  static const std::vector<std::string> extra{"n_exact", "j_lb_at_exact", "j_ub_at_exact", "j_exact", "rel_lb",
                                              "rel_ub"};
  return join({&graph_columns(), &bound_columns(), &extra});
}

}  // namespace schema

// ---------------------------------------------------------------------------
// Experiment specification

enum class Command { bounds, exact, simulate, sweep_n, sweep_p, report };

inline constexpr std::string_view to_string(Command c) {
  switch (c) {
    case Command::bounds: return "bounds";
    case Command::exact: return "exact";
    case Command::simulate: return "simulate";
    case Command::sweep_n: return "sweep-n";
    case Command::sweep_p: return "sweep-p";
    case Command::report: return "report";
  }
  return "unknown";
}

struct ExperimentSpec {
  Command command = Command::bounds;

  std::vector<Family> families{Family::star};
  std::string graph_file;
  /// Node counts to visit. Grid families snap each to the nearest square / cube.
  std::vector<std::size_t> sizes;
  /// Explicit grid side lengths; overrides `sizes` for grid families.
  std::vector<std::size_t> dims;
  double p_er = 0.8;
  std::size_t realizations = 1;
  std::uint64_t seed = 1;

  std::vector<double> p_values{0.9};
  std::optional<double> epsilon;
  std::optional<double> k;
  double sigma2 = 1.0;

  SimConfig sim;

  /// Exact index only for N up to this many nodes.
  std::size_t exact_cap = Limits::exact_nodes;
  std::size_t threads = 1;
  bool strict = false;

  /// Step-size parameter actually used: k = 0.8 when neither is given.
  double k_or_default() const { return k.value_or(0.8); }

  void validate() const {
    if (epsilon && k) throw ValidationError("--eps and --k are mutually exclusive");
    if (epsilon && !(*epsilon > 0.0)) throw ValidationError("--eps must be positive");
    if (k && !(*k > 0.0 && *k < 1.0)) throw ValidationError("--k must lie in (0, 1)");
    if (families.empty()) throw ValidationError("--graph: at least one family is required");
    if (p_values.empty()) throw ValidationError("--p: at least one value is required");
    for (double p : p_values)
      if (!(p > 0.0 && p <= 1.0)) throw ValidationError("--p must lie in (0, 1]");
    if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw ValidationError("--sigma2 must be non-negative");
    if (!(p_er > 0.0 && p_er <= 1.0)) throw ValidationError("--p-er must lie in (0, 1]");
    if (realizations == 0) throw ValidationError("--realizations must be at least 1");
    if (sim.ensemble == 0) throw ValidationError("--ensemble must be at least 1");
    for (auto f : families) {
      if (f == Family::file && graph_file.empty()) throw ValidationError("--graph file requires --graph-file");
      if (f != Family::file && sizes.empty() && !(dims.size() && (f == Family::grid2d || f == Family::grid3d))) {
        throw ValidationError("--n or --n-range is required for family " + std::string(to_string(f)));
      }
    }
    if (!dims.empty()) {
      if (dims.size() < 1 || dims.size() > 3) throw ValidationError("--dims takes 1 to 3 side lengths");
      for (auto d : dims)
        if (d < 2) throw ValidationError("--dims: every side must be at least 2");
    }
  }
};

// ---------------------------------------------------------------------------
// Graph resolution

struct ResolvedGraph {
  UndirectedGraph graph;
  Family family;
  std::size_t n_requested;
  std::string dims;
  std::string realization = "0";
  std::optional<std::uint64_t> graph_seed{};
  std::optional<std::size_t> er_attempts{};
};

namespace exp_detail {

inline std::string dims_label(const std::vector<std::size_t>& dims) {
  std::string s;
  for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? "x" : "") + std::to_string(dims[i]);
  return s;
}

inline std::vector<std::size_t> grid_dims_for(Family f, std::size_t n) {
  const std::size_t axes = f == Family::grid2d ? 2 : 3;
  const double side = std::round(std::pow(static_cast<double>(n), 1.0 / static_cast<double>(axes)));
  return std::vector<std::size_t>(axes, static_cast<std::size_t>(std::max(2.0, side)));
}

inline std::uint64_t er_seed(std::uint64_t master, std::size_t n, std::size_t realization) {
  return derive_seed(master, (static_cast<std::uint64_t>(n) << 20) + realization);
}

}  // namespace exp_detail

/// Graph instances for one family. Grid sizes that snap to the same side
/// length are visited once.
inline std::vector<ResolvedGraph> resolve_graphs(Family family, const ExperimentSpec& spec) {
  std::vector<ResolvedGraph> out;
  switch (family) {
    case Family::file: {
      auto g = load_edge_list(spec.graph_file);
      const auto n = g.n();
      out.push_back({std::move(g), family, n, ""});
      break;
    }
    case Family::grid2d:
    case Family::grid3d: {
      if (!spec.dims.empty()) {
        auto g = make_grid(spec.dims);
        const auto n = g.n();
        out.push_back({std::move(g), family, n, exp_detail::dims_label(spec.dims)});
        break;
      }
      std::vector<std::size_t> seen;
      for (auto n : spec.sizes) {
        const auto dims = exp_detail::grid_dims_for(family, n);
        if (std::find(seen.begin(), seen.end(), dims[0]) != seen.end()) continue;
        seen.push_back(dims[0]);
        out.push_back({make_grid(dims), family, n, exp_detail::dims_label(dims)});
      }
      break;
    }
    case Family::star:
      for (auto n : spec.sizes) out.push_back({make_star(n), family, n, ""});
      break;
    case Family::path:
      for (auto n : spec.sizes) out.push_back({make_path(n), family, n, ""});
      break;
    case Family::complete:
      for (auto n : spec.sizes) out.push_back({make_complete(n), family, n, ""});
      break;
    case Family::erdos_renyi:
      for (auto n : spec.sizes) {
        for (std::size_t r = 0; r < spec.realizations; ++r) {
          const auto seed = exp_detail::er_seed(spec.seed, n, r);
          Rng rng = make_rng(seed);
          auto sample = make_erdos_renyi(n, spec.p_er, rng, true);
          out.push_back({std::move(sample.graph), family, n, "", std::to_string(r), seed, sample.attempts});
        }
      }
      break;
  }
  return out;
}

inline RidlConfig config_for(const UndirectedGraph& g, const ExperimentSpec& spec, double p) {
  RidlConfig cfg = spec.epsilon ? RidlConfig::from_epsilon(g, p, *spec.epsilon, spec.sigma2)
                                : RidlConfig::from_k(g, p, spec.k_or_default(), spec.sigma2);
  const auto cond = check_consensus_conditions(g, cfg);
  if (!cond.passed()) {
    std::string msg = "graph with N=" + std::to_string(g.n()) + ": consensus conditions fail:";
    for (const auto& f : cond.failures) msg += " " + f + ";";
    throw ValidationError(msg);
  }
  cfg.validate_for(g);
  return cfg;
}

// ---------------------------------------------------------------------------
// Row builders

namespace exp_detail {

inline void put_graph(RowValues& row, const ResolvedGraph& rg) {
  row["family"] = std::string(to_string(rg.family));
  row["n_requested"] = static_cast<long long>(rg.n_requested);
  row["n"] = static_cast<long long>(rg.graph.n());
  row["dims"] = rg.dims;
  row["realization"] = rg.realization;
  if (rg.graph_seed) row["graph_seed"] = std::to_string(*rg.graph_seed);
  if (rg.er_attempts) row["er_attempts"] = static_cast<long long>(*rg.er_attempts);
}

inline void put_report(RowValues& row, const NoiseReport& r) {
  row["p"] = r.config.p;
  row["eps"] = r.config.epsilon;
  row["k"] = r.config.k();
  row["sigma2"] = r.config.sigma2;
  row["j_lb"] = r.j_lb;
  row["j_ub"] = r.j_ub;
  row["j_res_lb"] = r.j_res_lb;
  row["j_res_ub"] = r.j_res_ub;
  row["r_ave"] = r.r_ave;
  row["d_max"] = static_cast<long long>(r.config.d_max);
  row["lambda2"] = r.lambda2;
  row["lambdaN"] = r.lambda_n;
  if (r.j_exact) {
    row["j_exact"] = *r.j_exact;
    if (*r.j_exact > 0.0) {
      row["rel_lb"] = (*r.j_exact - r.j_lb) / *r.j_exact;
      row["rel_ub"] = (r.j_ub - *r.j_exact) / *r.j_exact;
    }
  }
}

/// Runs job(i) for i in [0, count) on a bounded pool and returns the results
/// in index order. The first failing index's exception is rethrown.
template <typename Result, typename Job>
std::vector<Result> parallel_map(std::size_t count, std::size_t threads, Job job) {
  std::vector<std::optional<Result>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  auto run = [&](std::size_t i) {
    try {
      slots[i] = job(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) run(i);
      });
  }
  std::vector<Result> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

struct Job {
  const ResolvedGraph* graph;
  double p;
};

inline std::vector<Job> jobs_for(const std::vector<ResolvedGraph>& graphs, const std::vector<double>& ps) {
  std::vector<Job> jobs;
  for (const auto& g : graphs)
    for (double p : ps) jobs.push_back({&g, p});
  return jobs;
}

inline std::vector<ResolvedGraph> all_graphs(const ExperimentSpec& spec) {
  std::vector<ResolvedGraph> graphs;
  for (auto f : spec.families) {
    auto part = resolve_graphs(f, spec);
    for (auto& g : part) graphs.push_back(std::move(g));
  }
  return graphs;
}

/// Mean and sample standard deviation rows over Erdos-Renyi realizations of
/// the same (N, p), appended after each group.
inline void append_realization_summaries(Table& t) {
  const std::size_t fam = t.column("family");
  const std::size_t nreq = t.column("n_requested");
  const std::size_t real = t.column("realization");
  const std::size_t pc = t.column("p");
  std::vector<std::vector<Cell>> out;
  std::size_t i = 0;
  while (i < t.rows.size()) {
    std::size_t j = i + 1;
    auto same = [&](std::size_t a, std::size_t b) {
      return t.rows[a][fam] == t.rows[b][fam] && t.rows[a][nreq] == t.rows[b][nreq] && t.rows[a][pc] == t.rows[b][pc];
    };
    while (j < t.rows.size() && same(i, j)) ++j;
    for (std::size_t r = i; r < j; ++r) out.push_back(t.rows[r]);
    const bool er = std::get<std::string>(t.rows[i][fam]) == to_string(Family::erdos_renyi);
    if (er && j - i > 1) {
      std::vector<Cell> mean = t.rows[i];
      std::vector<Cell> sd = t.rows[i];
      mean[real] = std::string("mean");
      sd[real] = std::string("sd");
      for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (!std::holds_alternative<double>(t.rows[i][c]) || c == pc) continue;
        double s = 0.0, ss = 0.0;
        std::size_t cnt = 0;
        for (std::size_t r = i; r < j; ++r)
          if (auto d = std::get_if<double>(&t.rows[r][c])) {
            s += *d;
            ss += *d * *d;
            ++cnt;
          }
        const double m = s / static_cast<double>(cnt);
        mean[c] = m;
        const double dc = static_cast<double>(cnt);
        sd[c] = cnt > 1 ? std::sqrt(std::max(0.0, (ss - dc * m * m) / (dc - 1.0))) : 0.0;
      }
      for (auto col : {"graph_seed", "er_attempts", "n"}) {
        mean[t.column(col)] = Cell{};
        sd[t.column(col)] = Cell{};
      }
      out.push_back(std::move(mean));
      out.push_back(std::move(sd));
    }
    i = j;
  }
  t.rows = std::move(out);
}

}  // namespace exp_detail

// ---------------------------------------------------------------------------
// Commands

/// Spectral and resistance bounds, one row per (graph, p).
inline Table run_bounds(const ExperimentSpec& spec) {
  spec.validate();
  const auto graphs = exp_detail::all_graphs(spec);
  const auto jobs = exp_detail::jobs_for(graphs, spec.p_values);
  Table t{schema::bounds(), {}};
  t.rows = exp_detail::parallel_map<std::vector<Cell>>(jobs.size(), spec.threads, [&](std::size_t i) {
    const auto& job = jobs[i];
    const RidlConfig cfg = config_for(job.graph->graph, spec, job.p);
    const NoiseReport r = analyze(job.graph->graph, cfg, {.exact_cap = spec.exact_cap, .compute_exact = false});
    RowValues row;
    exp_detail::put_graph(row, *job.graph);
    exp_detail::put_report(row, r);
    return project(t.columns, row);
  });
  exp_detail::append_realization_summaries(t);
  return t;
}

namespace exp_detail {

inline Table exact_table(const ExperimentSpec& spec, bool require_exact) {
  spec.validate();
  const auto graphs = all_graphs(spec);
  if (require_exact) {
    for (const auto& g : graphs) {
      if (g.graph.n() > spec.exact_cap) {
        throw ValidationError("exact: N = " + std::to_string(g.graph.n()) + " exceeds the exact-index cap of " +
                              std::to_string(spec.exact_cap) + " nodes; use the bounds command instead");
      }
    }
  }
  const auto jobs = jobs_for(graphs, spec.p_values);
  Table t{schema::exact(), {}};
  t.rows = parallel_map<std::vector<Cell>>(jobs.size(), spec.threads, [&](std::size_t i) {
    const auto& job = jobs[i];
    const RidlConfig cfg = config_for(job.graph->graph, spec, job.p);
    const NoiseReport r = analyze(job.graph->graph, cfg, {.exact_cap = spec.exact_cap, .compute_exact = true});
    RowValues row;
    put_graph(row, *job.graph);
    put_report(row, r);
    return project(t.columns, row);
  });
  append_realization_summaries(t);
  return t;
}

}  // namespace exp_detail

/// Bounds plus the exact index and the relative errors of both bounds.
inline Table run_exact(const ExperimentSpec& spec) { return exp_detail::exact_table(spec, true); }

/// Bounds for every N, exact index wherever N is within the cap.
inline Table run_sweep_n(const ExperimentSpec& spec) { return exp_detail::exact_table(spec, false); }

struct SimulationOutcome {
  Table table;
  bool all_converged = true;
};

/// Monte Carlo estimate next to the exact index (when within the cap) and the bounds.
inline SimulationOutcome run_simulate(const ExperimentSpec& spec) {
  spec.validate();
  const auto graphs = exp_detail::all_graphs(spec);
  const auto jobs = exp_detail::jobs_for(graphs, spec.p_values);
  SimulationOutcome out{Table{schema::simulate(), {}}, true};
  std::vector<char> converged(jobs.size(), 1);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& job = jobs[i];
    const RidlConfig cfg = config_for(job.graph->graph, spec, job.p);
    const NoiseReport r = analyze(job.graph->graph, cfg, {.exact_cap = spec.exact_cap, .compute_exact = true});
    SimConfig sim = spec.sim;
    sim.seed = derive_seed(spec.sim.seed, i);
    const SimEstimate est = estimate_noise_index(job.graph->graph, cfg, sim);
    RowValues row;
    exp_detail::put_graph(row, *job.graph);
    exp_detail::put_report(row, r);
    row["j_hat"] = est.j_hat;
    row["std_error"] = est.std_error;
    row["converged"] = est.converged;
    row["drift"] = est.drift;
    row["horizon"] = static_cast<long long>(est.horizon);
    row["ensemble"] = static_cast<long long>(est.samples_used);
    row["noise"] = std::string(to_string(sim.noise));
    row["sim_seed"] = std::to_string(sim.seed);
    out.table.rows.push_back(project(out.table.columns, row));
    out.all_converged = out.all_converged && est.converged;
  }
  return out;
}

/// Largest node count within `cap` that the family can realize, used when the
/// requested N is too large for the exact index.
inline std::size_t reduced_exact_size(Family f, std::size_t n, std::size_t cap) {
  if (n <= cap) return n;
  switch (f) {
    case Family::grid2d: {
      const auto s = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(cap))));
      return s * s;
    }
    case Family::grid3d: {
      auto s = static_cast<std::size_t>(std::floor(std::cbrt(static_cast<double>(cap))));
      while ((s + 1) * (s + 1) * (s + 1) <= cap) ++s;
      return s * s * s;
    }
    default:
      return cap;
  }
}

/// Relative errors of both bounds against p at fixed N. When N exceeds the
/// exact cap the exact index (and the bounds it is compared with) are
/// evaluated at the reduced size recorded in n_exact.
inline Table run_sweep_p(const ExperimentSpec& spec) {
  spec.validate();
  const auto graphs = exp_detail::all_graphs(spec);
  const auto jobs = exp_detail::jobs_for(graphs, spec.p_values);

  // Reduced graphs, one per full-size graph.
  std::vector<std::optional<ResolvedGraph>> reduced(graphs.size());
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const auto& g = graphs[gi];
    if (g.graph.n() <= spec.exact_cap || g.family == Family::file) continue;
    ExperimentSpec small = spec;
    small.dims.clear();
    small.realizations = 1;
    small.sizes = {reduced_exact_size(g.family, g.graph.n(), spec.exact_cap)};
    auto rs = resolve_graphs(g.family, small);
    if (!rs.empty()) reduced[gi] = std::move(rs.front());
  }

  Table t{schema::sweep_p(), {}};
  t.rows = exp_detail::parallel_map<std::vector<Cell>>(jobs.size(), spec.threads, [&](std::size_t i) {
    const auto& job = jobs[i];
    const auto gi = static_cast<std::size_t>(job.graph - graphs.data());
    const RidlConfig cfg = config_for(job.graph->graph, spec, job.p);
    const NoiseReport full = analyze(job.graph->graph, cfg, {.exact_cap = spec.exact_cap, .compute_exact = true});
    RowValues row;
    exp_detail::put_graph(row, *job.graph);
    exp_detail::put_report(row, full);
    if (full.j_exact) {
      row["n_exact"] = static_cast<long long>(full.n);
      row["j_lb_at_exact"] = full.j_lb;
      row["j_ub_at_exact"] = full.j_ub;
    } else if (reduced[gi]) {
      const auto& small = reduced[gi]->graph;
      const RidlConfig scfg = config_for(small, spec, job.p);
      const NoiseReport r = analyze(small, scfg, {.exact_cap = spec.exact_cap, .compute_exact = true});
      row["n_exact"] = static_cast<long long>(r.n);
      row["j_lb_at_exact"] = r.j_lb;
      row["j_ub_at_exact"] = r.j_ub;
      row["j_exact"] = *r.j_exact;
      row["rel_lb"] = (*r.j_exact - r.j_lb) / *r.j_exact;
      row["rel_ub"] = (r.j_ub - *r.j_exact) / *r.j_exact;
    }
    return project(t.columns, row);
  });
  exp_detail::append_realization_summaries(t);
  return t;
}

inline Table run_command(const ExperimentSpec& spec) {
  switch (spec.command) {
    case Command::bounds: return run_bounds(spec);
    case Command::exact: return run_exact(spec);
    case Command::sweep_n: return run_sweep_n(spec);
    case Command::sweep_p: return run_sweep_p(spec);
    case Command::simulate: return run_simulate(spec).table;
    case Command::report: break;
  }
  throw ValidationError("run_command: report writes a directory; call run_report");
}

// ---------------------------------------------------------------------------
// Full reproduction suite

struct ReportOptions {
  std::size_t n_min = 3;
  std::size_t n_max = 100;
  std::size_t sweep_p_n = 100;
  std::vector<double> sweep_p_values{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
};

/// Writes one sweep-n CSV per family, sweep_p.csv and manifest.json into
/// `dir` (created if missing). Returns the manifest.
inline nlohmann::ordered_json run_report(const ExperimentSpec& base, const std::filesystem::path& dir,
                                         const ReportOptions& opt = {}) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

  using clock = std::chrono::steady_clock;
  const auto wall_start = clock::now();
  nlohmann::ordered_json manifest;
  manifest["tool"] = "ridl-noise";
  manifest["version"] = std::string(kVersion);
  manifest["seed"] = base.seed;
  manifest["sim_seed"] = base.sim.seed;
  manifest["p"] = base.p_values.front();
  if (base.epsilon) manifest["eps"] = *base.epsilon;
  else manifest["k"] = base.k_or_default();
  manifest["sigma2"] = base.sigma2;
  manifest["p_er"] = base.p_er;
  manifest["realizations"] = base.realizations;
  manifest["exact_cap"] = base.exact_cap;
  manifest["n_range"] = {opt.n_min, opt.n_max};
  manifest["files"] = nlohmann::ordered_json::array();

  auto write = [&](const std::string& name, const Table& t, const std::string& command, double seconds) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    write_csv(out, t);
    if (!out) throw IoError("write failed for " + path.string());
    manifest["files"].push_back(
        {{"file", name}, {"command", command}, {"rows", t.rows.size()}, {"wall_seconds", seconds}});
  };

  const std::vector<Family> families{Family::star, Family::path, Family::grid2d,
                                     Family::grid3d, Family::complete, Family::erdos_renyi};
  for (auto f : families) {
    ExperimentSpec spec = base;
    spec.command = Command::sweep_n;
    spec.families = {f};
    spec.dims.clear();
    spec.sizes.clear();
    for (std::size_t n = opt.n_min; n <= opt.n_max; ++n) spec.sizes.push_back(n);
    const auto t0 = clock::now();
    const Table t = run_sweep_n(spec);
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    std::string name(to_string(f));
    std::replace(name.begin(), name.end(), '-', '_');
    write("sweep_n_" + name + ".csv", t, "sweep-n", secs);
  }

  ExperimentSpec sp = base;
  sp.command = Command::sweep_p;
  sp.families = {Family::star, Family::path, Family::grid2d, Family::grid3d, Family::complete, Family::erdos_renyi};
  sp.dims.clear();
  sp.sizes = {opt.sweep_p_n};
  sp.p_values = opt.sweep_p_values;
  const auto t0 = clock::now();
  const Table t = run_sweep_p(sp);
  write("sweep_p.csv", t, "sweep-p", std::chrono::duration<double>(clock::now() - t0).count());

  manifest["total_wall_seconds"] = std::chrono::duration<double>(clock::now() - wall_start).count();
  const auto mpath = dir / "manifest.json";
  std::ofstream m(mpath);
  if (!m) throw IoError("cannot write " + mpath.string());
  m << manifest.dump(2) << '\n';
  return manifest;
}

}  // namespace ridl
