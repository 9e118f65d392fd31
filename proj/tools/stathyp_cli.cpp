#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "stathyp/deformation.hpp"
#include "stathyp/dynamics.hpp"
#include "stathyp/error.hpp"
#include "stathyp/geometry.hpp"
#include "stathyp/integral.hpp"
#include "stathyp/io.hpp"
#include "stathyp/model.hpp"
#include "stathyp/potential.hpp"
#include "stathyp/verify.hpp"

using namespace stathyp;
using json = nlohmann::json;

namespace {

constexpr int kValidation = 2;
constexpr int kVerification = 3;
constexpr std::uint64_t kDefaultSeed = 0xC0FFEE;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::uint64_t parse_seed(const std::string& text) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used, 0);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Syntax, "seed must be a decimal or 0x-prefixed integer, got \"" + text + "\"");
  }
}

std::string seed_text(std::uint64_t seed) {
  std::ostringstream s;
  s << "0x" << std::hex << std::uppercase << seed;
  return s.str();
}

Vector point_for(const StatisticalModel& model, const std::string& literal) {
  const Vector x = parse_vector_literal(literal);
  if (x.size() != static_cast<Eigen::Index>(model.n())) {
    throw Error(ErrorKind::DimensionMismatch,
                "point has " + std::to_string(x.size()) + " entries, model has n=" + std::to_string(model.n()));
  }
  return x;
}

struct Options {
  std::string model_path;
  std::string point;
  std::string delta_f;
  std::string shift_v;
  double tau = 1.0;
  std::string deformation_path;
  std::string delta_k = "corrected";
  std::string scalar_r = "exact";
  std::string det_path = "adjugate";
  std::size_t steps = 0;
  std::string shift;
  std::size_t m = 3;
  std::string seed = "0xC0FFEE";
  double c_min = 0.5;
  double c_max = 10.0;
  std::size_t sweep_steps = 20;
  double tol = 1e-9;
  std::string region_path;
  std::size_t samples = 1'000'000;
  bool quick = false;
};

int geom_at(const Options& o) {
  const StatisticalModel model = parse_model(read_file(o.model_path));
  const GeometryReport r = geometry_at(evaluate(model, point_for(model, o.point)));
  std::cout << geometry_to_json(r) << "\n";
  return 0;
}

int deform_report(const Options& o) {
  const StatisticalModel model = parse_model(read_file(o.model_path));
  const Evaluation e = evaluate(model, point_for(model, o.point));
  const bool literal = !o.delta_f.empty() || !o.shift_v.empty();
  if (!o.deformation_path.empty() && literal) {
    throw Error(ErrorKind::InvalidArgument, "give either --deformation or an inline deformation, not both");
  }
  if (!o.delta_f.empty() && !o.shift_v.empty()) {
    throw Error(ErrorKind::InvalidArgument, "give either --delta-f or --shift-v, not both");
  }
  Deformation d = Deformation::constant(Vector());
  if (!o.deformation_path.empty()) {
    d = parse_deformation(read_file(o.deformation_path), model.n());
  } else if (!o.delta_f.empty()) {
    d = Deformation::constant(parse_vector_literal(o.delta_f));
  } else if (!o.shift_v.empty()) {
    d = Deformation::shift(parse_vector_literal(o.shift_v), o.tau);
  } else {
    throw Error(ErrorKind::InvalidArgument, "a deformation is required (--delta-f, --shift-v or --deformation)");
  }
  VariationOptions opts;
  if (o.delta_k == "as-printed") opts.delta_k = DeltaKMode::AsPrinted;
  else if (o.delta_k != "corrected") throw Error(ErrorKind::InvalidArgument, "--delta-k must be corrected or as-printed");
  if (o.scalar_r == "as-printed") opts.scalar_r = ScalarRMode::AsPrinted;
  else if (o.scalar_r != "exact") throw Error(ErrorKind::InvalidArgument, "--scalar-r must be exact or as-printed");
  if (o.det_path == "inverse") opts.det_path = DetVariationPath::Inverse;
  else if (o.det_path != "adjugate") throw Error(ErrorKind::InvalidArgument, "--det-path must be adjugate or inverse");
  const VariationReport r = delta_geometry(e, DeformationAt::resolve(d, model, e), opts);
  std::cout << variation_to_json(r) << "\n";
  return 0;
}

int replicator_run(const Options& o) {
  const StatisticalModel model = parse_model(read_file(o.model_path));
  const Vector x = point_for(model, o.point);
  ShiftChoice shift;
  if (o.shift == "auto") {
    shift = AutoShift{};
  } else if (!o.shift.empty()) {
    const Vector M = parse_vector_literal(o.shift);
    if (M.size() != 1) throw Error(ErrorKind::Syntax, "--shift takes auto or a single number");
    shift = M[0];
  }
  const WeightTrajectory traj = replicator_orbit(model, x, o.steps, shift);
  std::string out = "step";
  for (std::size_t a = 1; a <= model.m(); ++a) out += ",w_" + std::to_string(a);
  out += ",S\n";
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    const Vector& w = traj.steps[t].w;
    out += std::to_string(t);
    for (Eigen::Index a = 0; a < w.size(); ++a) out += "," + format_number(w[a]);
    out += "," + format_number(shannon_entropy(w)) + "\n";
  }
  std::cout << out;
  return 0;
}

int potential_verify(const Options& o) {
  if (o.m < 1) throw Error(ErrorKind::InvalidArgument, "--m must be at least 1");
  const std::uint64_t seed = parse_seed(o.seed);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 engine(seq);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const auto m = static_cast<Eigen::Index>(o.m);
  auto random_vector = [&]() {
    Vector v(m);
    for (Eigen::Index a = 0; a < m; ++a) v[a] = 1.5 * unit(engine);
    return v;
  };
  PotentialParams p;
  p.gamma = 1.0 + unit(engine);
  p.sigma = random_vector();
  p.sigma[0] = 0.0;
  const Vector f0 = random_vector();
  const Vector f1 = random_vector();
  const Vector h0 = closed_form_weights(f0, p);
  const Vector exact = closed_form_weights(f1, p);
  const Vector straight = integrate_weight_pde(f0, f1, h0, 1000);
  const Vector poly = integrate_weight_pde_path({f0, random_vector(), random_vector(), f1}, h0, 1000);
  const PotentialParams q = fit_params(f1, exact);

  const double closed = std::max((straight - exact).cwiseAbs().maxCoeff(), (poly - exact).cwiseAbs().maxCoeff());
  const double path = (straight - poly).cwiseAbs().maxCoeff();
  const double round_trip = std::max({std::abs(q.gamma - p.gamma), (q.sigma - p.sigma).cwiseAbs().maxCoeff(),
                                      (closed_form_weights(f1, q) - exact).cwiseAbs().maxCoeff()});
  const double cocycle = cocycle_residual(log_ratios(f1, exact).c);
  const bool ok = closed <= 1e-9 && path <= 1e-9 && round_trip <= 1e-10;

  json doc;
  doc["seed"] = seed_text(seed);
  doc["m"] = o.m;
  doc["rk4_steps"] = 1000;
  doc["closed_form_residual"] = closed;
  doc["path_independence_residual"] = path;
  doc["round_trip_residual"] = round_trip;
  doc["cocycle_residual"] = cocycle;
  doc["passed"] = ok;
  std::cout << doc.dump(2) << "\n";
  return ok ? 0 : kVerification;
}

int sweep_s2(const Options& o) {
  if (!(o.c_min >= 0.0) || !(o.c_max >= o.c_min)) throw Error(ErrorKind::Domain, "need 0 <= c-min <= c-max");
  if (o.sweep_steps < 1) throw Error(ErrorKind::InvalidArgument, "--steps must be at least 1");
  const StatisticalModel model = StatisticalModel::super_ideal(2);
  std::string out = "c,closed,quadrature,asymptote,ratio\n";
  for (std::size_t i = 0; i < o.sweep_steps; ++i) {
    const double c = o.sweep_steps == 1
                         ? o.c_min
                         : o.c_min + (o.c_max - o.c_min) * static_cast<double>(i) / static_cast<double>(o.sweep_steps - 1);
    const double closed = closed_S2(c);
    const double quad = entropy_integral(model, Vector::Constant(2, -c), Vector::Constant(2, c), o.tol).value;
    const double asym = asymptote_S2(c);
    out += format_number(c) + "," + format_number(closed) + "," + format_number(quad) + "," + format_number(asym) + "," +
           format_number(closed / asym) + "\n";
  }
  std::cout << out;
  return 0;
}

int volume_check(const Options& o) {
  const std::uint64_t seed = parse_seed(o.seed);
  const ConeRegion region = parse_region(read_file(o.region_path));
  const VolumeCheck v = linear_entropy_volume_check(region, o.samples, seed);
  json doc;
  doc["seed"] = seed_text(seed);
  doc["samples"] = v.samples;
  doc["delta_S"] = v.delta_S;
  doc["volume_times"] = v.volume_times;
  doc["mc_sigma"] = v.mc_sigma;
  doc["volume"] = v.volume;
  doc["quadrature_error"] = v.quadrature_error;
  doc["cone_face_flux"] = v.face_flux;
  doc["within_3_sigma"] = std::abs(v.delta_S - v.volume_times) <= 3.0 * v.mc_sigma;
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int verify_all(const Options& o) {
  SuiteOptions opts;
  opts.seed = parse_seed(o.seed);
  if (o.quick) {
    opts.fraction = 0.1;
    opts.mc_samples = 100'000;
  }
  std::cout << "seed " << seed_text(opts.seed) << "\n";
  bool all = true;
  for (const Criterion& c : criteria()) {
    const CriterionResult r = run_criterion(c, opts);
    all = all && r.passed;
    std::cout << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.module << ": " << r.name << " (" << r.detail
              << ")\n";
    std::cout.flush();
  }
  std::cout << (all ? "all suites passed" : "some suites failed") << "\n";
  return all ? 0 : kVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Statistical hypersurfaces: geometry, entropy deformations, replicator dynamics and integral checks"};
  app.require_subcommand(1);
  Options o;
  int (*action)(const Options&) = nullptr;

  CLI::App* geom = app.add_subcommand("geom", "pointwise geometry");
  geom->require_subcommand(1);
  CLI::App* geom_at_cmd = geom->add_subcommand("at", "geometry report at a point (JSON)");
  geom_at_cmd->add_option("model", o.model_path, "model document")->required();
  geom_at_cmd->add_option("--point", o.point, "comma-separated point")->required();
  geom_at_cmd->callback([&] { action = geom_at; });

  CLI::App* deform = app.add_subcommand("deform", "entropy deformations");
  deform->require_subcommand(1);
  CLI::App* report = deform->add_subcommand("report", "variation report at a point (JSON)");
  report->add_option("model", o.model_path, "model document")->required();
  report->add_option("--point", o.point, "comma-separated point")->required();
  report->add_option("--delta-f", o.delta_f, "constant variation of each f, comma-separated");
  report->add_option("--shift-v", o.shift_v, "coordinate shift direction, comma-separated");
  report->add_option("--tau", o.tau, "coordinate shift parameter");
  report->add_option("--deformation", o.deformation_path, "deformation document");
  report->add_option("--delta-k", o.delta_k, "corrected | as-printed");
  report->add_option("--scalar-r", o.scalar_r, "exact | as-printed");
  report->add_option("--det-path", o.det_path, "adjugate | inverse");
  report->callback([&] { action = deform_report; });

  CLI::App* rep = app.add_subcommand("replicator", "replicator dynamics");
  rep->require_subcommand(1);
  CLI::App* run = rep->add_subcommand("run", "replicator orbit of the Gibbs weights (CSV)");
  run->add_option("--model", o.model_path, "model document")->required();
  run->add_option("--point", o.point, "comma-separated point")->required();
  run->add_option("--steps", o.steps, "number of steps")->required();
  run->add_option("--shift", o.shift, "auto or a ground-energy shift M");
  run->callback([&] { action = replicator_run; });

  CLI::App* pot = app.add_subcommand("potential", "potential reconstruction");
  pot->require_subcommand(1);
  CLI::App* pv = pot->add_subcommand("verify", "round-trip and path-independence residuals (JSON)");
  pv->add_option("--m", o.m, "number of weights");
  pv->add_option("--seed", o.seed, "random seed");
  pv->callback([&] { action = potential_verify; });

  CLI::App* sweep = app.add_subcommand("sweep", "parameter sweeps");
  sweep->require_subcommand(1);
  CLI::App* s2 = sweep->add_subcommand("s2", "super-ideal entropy integral over [-c,c]^2 (CSV)");
  s2->add_option("--c-min", o.c_min, "first c");
  s2->add_option("--c-max", o.c_max, "last c");
  s2->add_option("--steps", o.sweep_steps, "number of rows");
  s2->add_option("--tol", o.tol, "quadrature tolerance");
  s2->callback([&] { action = sweep_s2; });

  CLI::App* vol = app.add_subcommand("volume", "linear-case volume identity");
  vol->require_subcommand(1);
  CLI::App* vc = vol->add_subcommand("check", "entropy difference vs (n+1) volume (JSON)");
  vc->add_option("--region", o.region_path, "region document")->required();
  vc->add_option("--samples", o.samples, "Monte Carlo samples");
  vc->add_option("--seed", o.seed, "random seed");
  vc->callback([&] { action = volume_check; });

  CLI::App* va = app.add_subcommand("verify-all", "run every invariant suite");
  va->add_option("--seed", o.seed, "random seed");
  va->add_flag("--quick", o.quick, "reduced trial counts");
  va->callback([&] { action = verify_all; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidation;
  }
  try {
    return action ? action(o) : kValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Internal ? kVerification : kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
}
