#include <CLI11.hpp>

#include <mahlerlab/io.hpp>
#include <mahlerlab/report.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

using namespace mahlerlab;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitNotConverged = 3;

const std::vector<std::string> kFunctionals = {"volume", "polar-volume", "mahler", "mahler-p", "tilde-h",
                                               "bk-diag", "B", "santalo", "john"};

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::NotConverged:
    case ErrorCode::ToleranceNotReached: return kExitNotConverged;
    case ErrorCode::NonFiniteIntegrand:
    case ErrorCode::OscillationBudgetExceeded:
    case ErrorCode::EmptyShell:
    case ErrorCode::EmptyRegion:
    case ErrorCode::PolarVertexOutOfRange: return kExitFailure;
    default: return kExitInvalid;
  }
}

/// Flags as parsed; unset optionals fall back to the config file, then to defaults.
struct Flags {
  std::optional<std::string> body, dim, functional, suite, format, out, point, route;
  std::optional<int> trials, threads;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol, p;
  std::string config;
};

struct RunConfig {
  std::string command;
  std::string body;
  std::vector<int> dims;
  bool dim_given = false;
  std::vector<std::string> functionals;
  std::string suite = "core";
  int trials = 10;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  report::Format format = report::Format::JsonLines;
  std::string out;
  int threads = 0;
  std::optional<Vec> point;
  double p = 1.0;
  functionals::Route route = functionals::Route::Geometric;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<int> parse_dims(const std::string& s) {
  std::vector<int> dims;
  for (const auto& part : split(s, ',')) {
    std::size_t used = 0;
    int d = 0;
    try {
      d = std::stoi(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != part.size()) throw Error(ErrorCode::InvalidArgument, "--dim expects integers, got '" + part + "'");
    if (d < 1 || d > kMaxDim) throw Error(ErrorCode::TooLarge, "dimension must lie in [1, " + std::to_string(kMaxDim) + "]");
    dims.push_back(d);
  }
  if (dims.empty()) throw Error(ErrorCode::InvalidArgument, "--dim is empty");
  return dims;
}

Vec parse_point(const std::string& s) {
  const auto parts = split(s, ',');
  Vec v(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    try {
      v(i) = std::stod(parts[i]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "--point expects comma-separated numbers");
    }
  }
  return v;
}

template <class T>
std::optional<T> from_config(const json& cfg, const char* key) {
  if (!cfg.contains(key)) return std::nullopt;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("config key '") + key + "': " + e.what());
  }
}

/// flags > config file > defaults
RunConfig resolve(const std::string& command, const Flags& f) {
  json cfg = json::object();
  if (!f.config.empty()) {
    cfg = io::read_json_file(f.config);
    if (!cfg.is_object()) throw Error(ErrorCode::ParseError, "config file must hold a JSON object");
  }
  auto pick = [&](const auto& flag, const char* key) {
    using T = typename std::decay_t<decltype(flag)>::value_type;
    return flag ? flag : from_config<T>(cfg, key);
  };
  RunConfig rc;
  rc.command = command;
  if (auto v = pick(f.body, "body")) rc.body = *v;
  std::optional<std::string> dim = f.dim;
  if (!dim && cfg.contains("dim")) dim = cfg["dim"].is_number() ? std::to_string(cfg["dim"].get<int>()) : cfg["dim"].get<std::string>();
  if (dim) {
    rc.dims = parse_dims(*dim);
    rc.dim_given = true;
  }
  if (auto v = pick(f.functional, "functional")) {
    rc.functionals = *v == "all" ? kFunctionals : split(*v, ',');
    for (const auto& name : rc.functionals)
      if (std::find(kFunctionals.begin(), kFunctionals.end(), name) == kFunctionals.end())
        throw Error(ErrorCode::InvalidArgument, "unknown functional '" + name + "'");
  }
  if (auto v = pick(f.suite, "suite")) rc.suite = *v;
  if (auto v = pick(f.trials, "trials")) rc.trials = *v;
  if (rc.trials < 0) throw Error(ErrorCode::InvalidArgument, "--trials must be non-negative");
  rc.seed = pick(f.seed, "seed");
  rc.tol = pick(f.tol, "tol");
  if (rc.tol && !(*rc.tol > 0.0 && *rc.tol < 1.0)) throw Error(ErrorCode::InvalidArgument, "--tol must lie in (0,1)");
  if (auto v = pick(f.format, "format")) rc.format = report::parse_format(*v);
  if (auto v = pick(f.out, "out")) rc.out = *v;
  if (auto v = pick(f.threads, "threads")) rc.threads = *v;
  if (auto v = pick(f.point, "point")) rc.point = parse_point(*v);
  if (auto v = pick(f.p, "p")) rc.p = *v;
  if (auto v = pick(f.route, "route")) {
    if (*v == "geometric") rc.route = functionals::Route::Geometric;
    else if (*v == "integral") rc.route = functionals::Route::Integral;
    else throw Error(ErrorCode::InvalidArgument, "--route expects geometric or integral");
  }
  return rc;
}

quad::QuadConfig quad_config(const RunConfig& rc) {
  quad::QuadConfig q;
  if (rc.tol) q.rel_tol = *rc.tol;
  return q;
}

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

/// Evaluates one functional; throws mahlerlab::Error on invalid input.
report::Record evaluate(const std::string& name, const geom::ConvexBody& K, const std::string& descriptor, const RunConfig& rc) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = K.dim();
  report::Record r;
  r.functional = name;
  r.body = descriptor;
  r.route = "geometric";
  const auto q = quad_config(rc);
  tube::TubeConfig tc;
  tc.quad = q;
  auto take = [&](const functionals::FunctionalValue& fv) {
    r.value = fv.value;
    r.error = fv.error;
    r.route = functionals::to_string(fv.provenance);
    r.converged = fv.converged;
  };
  const auto point_or = [&](const Vec& fallback) {
    if (!rc.point) return fallback;
    if (rc.point->size() != n) throw Error(ErrorCode::InvalidArgument, "--point dimension does not match the body");
    return *rc.point;
  };

  if (name == "volume") {
    r.value = geom::volume(K);
  } else if (name == "polar-volume") {
    take(functionals::polar_volume(K, rc.route, q));
  } else if (name == "mahler") {
    take(functionals::mahler(K, rc.route, q));
  } else if (name == "mahler-p") {
    take(functionals::mahler_p(K, rc.p, q));
    r.extra["p"] = rc.p;
  } else if (name == "tilde-h") {
    const Vec x = point_or(Vec::Zero(n));
    r.value = functionals::tilde_h(K, x);
    r.extra["point"] = vec_json(x);
  } else if (name == "bk-diag") {
    const Vec a = point_or(geom::barycenter(K));
    take(tube::bergman_diagonal(K, a, tc));
    r.extra["point"] = vec_json(a);
  } else if (name == "B") {
    take(tube::B_invariant(K, tc));
  } else if (name == "santalo") {
    const auto s = position::santalo_point(K);
    r.value = s.value;
    r.error = 0.0;
    r.converged = s.converged;
    r.extra["point"] = vec_json(s.point);
    r.extra["polar_barycenter_norm"] = s.polar_barycenter.norm();
    r.extra["iterations"] = s.iterations;
  } else if (name == "john") {
    const auto jp = position::john_normalize(geom::translate(K, -geom::barycenter(K)));
    r.value = jp.r;
    json A = json::array();
    for (int i = 0; i < n; ++i) A.push_back(vec_json(jp.map.A.row(i).transpose()));
    r.extra["matrix"] = A;
    r.extra["a"] = vec_json(jp.a);
    r.extra["ball_in_body"] = jp.ball_in_body;
    r.extra["body_in_ball"] = jp.body_in_ball;
    r.extra["polar_in_ball"] = jp.polar_in_ball;
  }
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// Writes the buffered output to --out or stdout.
void emit(const RunConfig& rc, const std::string& text) {
  if (rc.out.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream os(rc.out, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::InvalidArgument, "cannot write '" + rc.out + "'");
  os << text;
}

int cmd_compute(const RunConfig& rc) {
  if (rc.body.empty()) throw Error(ErrorCode::InvalidArgument, "compute needs --body");
  if (rc.functionals.empty()) throw Error(ErrorCode::InvalidArgument, "compute needs --functional");
  const int dim = rc.dim_given ? rc.dims.front() : io::default_dim(rc.body);
  const auto K = io::load_body(rc.body, dim);
  std::vector<report::Record> recs;
  for (const auto& f : rc.functionals) recs.push_back(evaluate(f, K, rc.body, rc));
  std::ostringstream os;
  report::write_records(os, recs, rc.format);
  emit(rc, os.str());
  for (const auto& r : recs)
    if (!r.converged) {
      std::cerr << "NotConverged: " << r.functional << " did not reach the requested tolerance\n";
      return kExitNotConverged;
    }
  return kExitOk;
}

int cmd_verify(const RunConfig& rc) {
  if (!rc.seed) throw Error(ErrorCode::InvalidArgument, "verify needs --seed (randomized corpus)");
  proofcheck::SuiteOptions opt;
  if (rc.dim_given) opt.dims = rc.dims;
  opt.trials = rc.trials;
  opt.seed = *rc.seed;
  opt.threads = rc.threads;
  if (rc.tol) opt.check.kernel.quad.rel_tol = *rc.tol;
  const auto suite = proofcheck::parse_suite(rc.suite);
  const auto reps = proofcheck::run_suite(suite, opt);
  std::ostringstream os;
  report::write_reports(os, reps, rc.format);
  emit(rc, os.str());
  const auto s = proofcheck::summarize(reps);
  std::cerr << "suite " << rc.suite << ": " << report::summary_line(s) << '\n';
  return s.hard_failures > 0 ? kExitFailure : kExitOk;
}

int cmd_sweep(const RunConfig& rc) {
  if (!rc.seed) throw Error(ErrorCode::InvalidArgument, "sweep needs --seed (randomized corpus)");
  if (rc.functionals.empty()) throw Error(ErrorCode::InvalidArgument, "sweep needs --functional");
  const std::vector<int> dims = rc.dim_given ? rc.dims : std::vector<int>{1, 2, 3};
  const auto corpus = catalog::standard_corpus(dims, rc.trials, *rc.seed);
  struct Item {
    std::vector<report::Record> recs;
    std::string error;
    int code = kExitOk;
  };
  auto items = parallel_map<Item>(corpus.size(), resolve_threads(rc.threads), [&](std::size_t i) {
    Item it;
    const auto& nb = corpus[i];
    const auto Kc = geom::translate(nb.body, -geom::barycenter(nb.body));
    for (const auto& f : rc.functionals) {
      try {
        it.recs.push_back(evaluate(f, Kc, nb.name, rc));
      } catch (const Error& e) {
        it.error = nb.name + ": " + e.what();
        it.code = kExitFailure;
      }
    }
    return it;
  });
  std::vector<report::Record> recs;
  int code = kExitOk;
  for (const auto& it : items) {
    recs.insert(recs.end(), it.recs.begin(), it.recs.end());
    if (it.code != kExitOk) {
      std::cerr << it.error << '\n';
      code = kExitFailure;
    }
    for (const auto& r : it.recs)
      if (!r.converged && code == kExitOk) code = kExitNotConverged;
  }
  std::ostringstream os;
  report::write_records(os, recs, rc.format);
  emit(rc, os.str());
  return code;
}

int cmd_catalog(const RunConfig& rc) {
  std::ostringstream os;
  report::write_catalog(os, rc.format);
  emit(rc, os.str());
  return kExitOk;
}

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--body", f.body, "catalog:NAME, catalog:random-hull(k,seed), inline JSON, or a JSON file");
  app->add_option("--dim", f.dim, "dimension, or a comma-separated list for corpus commands");
  app->add_option("--functional", f.functional, "comma-separated functionals, or 'all'");
  app->add_option("--suite", f.suite, "core, paper or conjecture");
  app->add_option("--trials", f.trials, "random hulls per dimension in the corpus");
  app->add_option("--seed", f.seed, "master seed");
  app->add_option("--tol", f.tol, "relative quadrature tolerance");
  app->add_option("--format", f.format, "json-lines or csv");
  app->add_option("--out", f.out, "output path (default stdout)");
  app->add_option("--threads", f.threads, "worker threads (fallback: MAHLERLAB_THREADS)");
  app->add_option("--point", f.point, "comma-separated point for tilde-h and bk-diag");
  app->add_option("--p", f.p, "exponent for mahler-p");
  app->add_option("--route", f.route, "geometric or integral, for polar-volume and mahler");
  app->add_option("--config", f.config, "JSON config file; flags take precedence");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mahlerlab: Mahler volumes, tube-domain Bergman kernels, and verification suites"};
  app.require_subcommand(1);
  Flags flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"compute", "compute functionals of one body"},
           {"verify", "run a verification suite over the standard corpus"},
           {"sweep", "evaluate one functional over the standard corpus"},
           {"catalog", "list built-in bodies"}}) {
    subs[name] = app.add_subcommand(name, help);
    add_common(subs[name], flags);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInvalid;
  }
  std::string command;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) command = name;
  try {
    const RunConfig rc = resolve(command, flags);
    if (command == "compute") return cmd_compute(rc);
    if (command == "verify") return cmd_verify(rc);
    if (command == "sweep") return cmd_sweep(rc);
    return cmd_catalog(rc);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
