// ridl-noise: noise index of randomized consensus over randomly induced
// discretized Laplacians. Exit codes: 0 ok, 2 invalid input, 3 numerical
// failure (or non-convergence with --strict), 4 I/O.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ridl/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct RawOptions {
  std::vector<std::string> graphs;
  std::string graph_file;
  std::optional<std::size_t> n;
  std::string n_range;
  std::string dims;
  std::vector<double> p;
  std::optional<double> eps;
  std::optional<double> k;
  double sigma2 = 1.0;
  double p_er = 0.8;
  std::uint64_t seed = 1;
  std::size_t realizations = 1;
  std::size_t horizon = 0;
  std::size_t ensemble = 1000;
  std::string noise = "gaussian";
  double burn_in_check = 0.05;
  std::size_t exact_cap = ridl::Limits::exact_nodes;
  std::size_t threads = 1;
  std::string output;
  std::string format = "csv";
  bool strict = false;
};

std::size_t parse_size(const std::string& s, const char* flag) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size() || v < 0) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ridl::ValidationError(std::string(flag) + ": cannot parse \"" + s + "\" as a non-negative integer");
  }
}

std::vector<std::size_t> parse_list(const std::string& s, char sep, const char* flag) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(parse_size(s.substr(start, pos - start), flag));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

ridl::ExperimentSpec to_spec(ridl::Command cmd, const RawOptions& o) {
  ridl::ExperimentSpec spec;
  spec.command = cmd;
  const bool sweep = cmd == ridl::Command::sweep_n || cmd == ridl::Command::sweep_p || cmd == ridl::Command::report;

  spec.families.clear();
  for (const auto& g : o.graphs) spec.families.push_back(ridl::parse_family(g));
  if (spec.families.empty()) {
    if (!sweep) throw ridl::ValidationError("--graph is required");
    spec.families = {ridl::Family::star, ridl::Family::path, ridl::Family::grid2d,
                     ridl::Family::grid3d, ridl::Family::complete, ridl::Family::erdos_renyi};
  }
  spec.graph_file = o.graph_file;

  if (o.n && !o.n_range.empty()) throw ridl::ValidationError("--n and --n-range are mutually exclusive");
  if (o.n) {
    spec.sizes = {*o.n};
  } else if (!o.n_range.empty()) {
    const auto r = parse_list(o.n_range, ':', "--n-range");
    if (r.size() != 2 || r[0] > r[1]) throw ridl::ValidationError("--n-range expects A:B with A <= B");
    for (auto n = r[0]; n <= r[1]; ++n) spec.sizes.push_back(n);
  } else if (cmd == ridl::Command::sweep_n || cmd == ridl::Command::report) {
    for (std::size_t n = 3; n <= 100; ++n) spec.sizes.push_back(n);
  } else if (cmd == ridl::Command::sweep_p) {
    spec.sizes = {100};
  }
  if (!o.dims.empty()) spec.dims = parse_list(o.dims, 'x', "--dims");

  if (!o.p.empty()) {
    spec.p_values = o.p;
  } else if (cmd == ridl::Command::sweep_p) {
    spec.p_values = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  }
  spec.epsilon = o.eps;
  spec.k = o.k;
  spec.sigma2 = o.sigma2;
  spec.p_er = o.p_er;
  spec.seed = o.seed;
  spec.realizations = o.realizations;
  spec.sim.horizon = o.horizon;
  spec.sim.ensemble = o.ensemble;
  spec.sim.noise = ridl::parse_noise(o.noise);
  spec.sim.burn_in_check = o.burn_in_check;
  spec.sim.seed = o.seed;
  spec.sim.threads = o.threads;
  spec.exact_cap = o.exact_cap;
  spec.threads = o.threads;
  spec.strict = o.strict;
  if (o.format != "csv" && o.format != "json") throw ridl::ValidationError("--format must be csv or json");
  spec.validate();
  return spec;
}

void add_options(CLI::App* sub, RawOptions& o) {
  auto env = [](const std::string& flag) {
    std::string name = "RIDL_NOISE_";
    for (char c : flag) name += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return name;
  };
  sub->add_option("--graph", o.graphs, "star|path|grid2d|grid3d|complete|erdos-renyi|file (comma list)")
      ->delimiter(',')
      ->envname(env("graph"));
  sub->add_option("--graph-file", o.graph_file, "edge list: \"n m\" then m lines \"i j\"")->envname(env("graph-file"));
  sub->add_option("--n", o.n, "node count")->envname(env("n"));
  sub->add_option("--n-range", o.n_range, "inclusive node-count range A:B")->envname(env("n-range"));
  sub->add_option("--dims", o.dims, "grid side lengths AxB[xC]")->envname(env("dims"));
  sub->add_option("--p", o.p, "activation probability (comma list allowed)")->delimiter(',')->envname(env("p"));
  sub->add_option("--eps", o.eps, "step size eps, 0 < eps < 1/d_max")->envname(env("eps"));
  sub->add_option("--k", o.k, "normalized step k = eps*d_max in (0,1); default 0.8")->envname(env("k"));
  sub->add_option("--sigma2", o.sigma2, "noise variance")->envname(env("sigma2"));
  sub->add_option("--p-er", o.p_er, "Erdos-Renyi edge probability")->envname(env("p-er"));
  sub->add_option("--seed", o.seed, "master RNG seed")->envname(env("seed"));
  sub->add_option("--realizations", o.realizations, "Erdos-Renyi draws per N")->envname(env("realizations"));
  sub->add_option("--horizon", o.horizon, "simulation steps T (0 = from the spectral gap)")->envname(env("horizon"));
  sub->add_option("--ensemble", o.ensemble, "simulation replications M")->envname(env("ensemble"));
  sub->add_option("--noise", o.noise, "gaussian|rademacher|uniform")->envname(env("noise"));
  sub->add_option("--burn-in-check", o.burn_in_check, "relative drift threshold for convergence")
      ->envname(env("burn-in-check"));
  sub->add_option("--exact-cap", o.exact_cap, "largest N for the exact index")->envname(env("exact-cap"));
  sub->add_option("--threads", o.threads, "worker threads")->envname(env("threads"));
  sub->add_option("--output", o.output, "output file (directory for report); default stdout")
      ->envname(env("output"));
  sub->add_option("--format", o.format, "csv|json")->envname(env("format"));
  sub->add_flag("--strict", o.strict, "exit 3 when a simulation does not converge")->envname(env("strict"));
}

int emit(const ridl::Table& t, const RawOptions& o) {
  const auto fmt = o.format == "json" ? ridl::OutputFormat::json : ridl::OutputFormat::csv;
  if (o.output.empty()) {
    ridl::write_table(std::cout, t, fmt);
    return kExitOk;
  }
  const std::filesystem::path path(o.output);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw ridl::IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ridl::IoError("cannot open " + o.output + " for writing");
  ridl::write_table(out, t, fmt);
  if (!out) throw ridl::IoError("write failed for " + o.output);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise index of randomized consensus over randomly induced discretized Laplacians"};
  app.set_version_flag("--version", std::string(ridl::kVersion));
  app.require_subcommand(1);

  RawOptions opts;
  struct Entry {
    ridl::Command cmd;
    const char* help;
  };
  const Entry entries[] = {
      {ridl::Command::bounds, "spectral and effective-resistance bounds"},
      {ridl::Command::exact, "exact index from the second-moment operator, with bound relative errors"},
      {ridl::Command::simulate, "Monte Carlo estimate next to the exact index and bounds"},
      {ridl::Command::sweep_n, "bounds and exact index over a range of N"},
      {ridl::Command::sweep_p, "bound relative errors over activation probabilities at fixed N"},
      {ridl::Command::report, "full reproduction suite: CSVs and a JSON manifest in --output DIR"},
  };
  std::vector<std::pair<CLI::App*, ridl::Command>> subs;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(std::string(ridl::to_string(e.cmd)), e.help);
    add_options(sub, opts);
    subs.emplace_back(sub, e.cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    ridl::Command cmd = ridl::Command::bounds;
    for (const auto& [sub, c] : subs)
      if (sub->parsed()) cmd = c;
    const ridl::ExperimentSpec spec = to_spec(cmd, opts);
    for (double p : spec.p_values)
      if (p < 0.1) std::cerr << "warning: p = " << p << " mixes slowly; expect large indices and long horizons\n";

    switch (cmd) {
      case ridl::Command::report: {
        if (opts.output.empty()) throw ridl::ValidationError("report: --output DIR is required");
        ridl::ReportOptions ropt;
        ropt.n_min = *std::min_element(spec.sizes.begin(), spec.sizes.end());
        ropt.n_max = *std::max_element(spec.sizes.begin(), spec.sizes.end());
        const auto manifest = ridl::run_report(spec, opts.output, ropt);
        std::cerr << "report written to " << opts.output << " in " << manifest["total_wall_seconds"].get<double>()
                  << " s\n";
        return kExitOk;
      }
      case ridl::Command::simulate: {
        const auto outcome = ridl::run_simulate(spec);
        emit(outcome.table, opts);
        if (!outcome.all_converged) {
          std::cerr << "warning: at least one simulation did not reach steady state; raise --horizon\n";
          if (spec.strict) return kExitNumerical;
        }
        return kExitOk;
      }
      default:
        return emit(ridl::run_command(spec), opts);
    }
  } catch (const ridl::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ridl::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ridl::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
