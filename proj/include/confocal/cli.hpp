#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "confocal/billiards.hpp"
#include "confocal/errors.hpp"
#include "confocal/geometry.hpp"
#include "confocal/io/dataset.hpp"
#include "confocal/io/report.hpp"
#include "confocal/io/svg.hpp"
#include "confocal/pencil.hpp"
#include "confocal/regression.hpp"
#include "confocal/regularize.hpp"

namespace confocal::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDomain = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string command;
  std::string data;
  std::string batch;
  std::vector<std::string> cols;
  std::string mass_col;
  std::string out;
  int ell = 0;
  std::vector<double> through, at, dir, error_cov, jacobi, start;
  std::string norm;
  double bound = 0;
  double member = 0;
  int bounces = 0;
};

namespace detail {

inline Vector to_vector(const std::vector<double>& v, Eigen::Index k, const char* name) {
  if (static_cast<Eigen::Index>(v.size()) != k)
    throw UsageError(std::string("--") + name + " needs " + std::to_string(k) + " comma-separated values");
  return Eigen::Map<const Vector>(v.data(), k);
}

inline io::PencilSummary summarize(const ConfocalPencil& p) {
  io::PencilSummary s{p.center(), p.frame(), p.poles(), p.principal_moments(), p.mass(), p.gyration_moment(), {}};
  for (const auto& a : p.attached_points()) s.attached_points.push_back({static_cast<long>(a.index), a.plus, a.minus});
  return s;
}

inline io::FitEntry fit_entry(const FlatSubspace& flat, const std::optional<Hyperplane>& plane, double moment,
                              const std::string& role, const std::string& kind) {
  io::FitEntry e{role, kind, flat.base_point(), flat.basis(), std::nullopt, std::nullopt, moment, std::nullopt,
                 std::nullopt};
  if (plane) {
    e.normal = plane->normal();
    e.offset = plane->offset();
    if (plane->dim() == 2 && std::abs(plane->normal()[1]) > 1e-15) {
      e.slope = -plane->normal()[0] / plane->normal()[1];
      e.intercept = plane->offset() / plane->normal()[1];
    }
  }
  return e;
}

inline io::FitEntry fit_entry(const FitResult& f, const std::string& kind) {
  return fit_entry(f.flat, f.hyperplane, f.moment, role_name(f.role), kind);
}

inline io::JacobiEntry jacobi_entry(const Vector& point, const JacobiCoordinates& jc) {
  return {point, jc.point_principal, jc.lambdas, jc.degenerate};
}

inline void add_tolerances(io::Report& r) {
  r.tolerances["rank_tol"] = {kRankTol, "confocal::kRankTol"};
  r.tolerances["gap_tol"] = {kGapTol, "confocal::kGapTol"};
  r.tolerances["coord_tol"] = {kCoordTol, "confocal::kCoordTol"};
  r.tolerances["symmetry_tol"] = {kSymmetryTol, "confocal::kSymmetryTol"};
  r.tolerances["anchor_tol"] = {kAnchorTol, "confocal::kAnchorTol"};
  r.tolerances["tie_tol"] = {kTieTol, "confocal::kTieTol"};
  r.tolerances["hit_tol"] = {kHitTol, "confocal::kHitTol"};
  r.tolerances["fit_step_tol"] = {kFitStepTol, "confocal::kFitStepTol"};
  r.tolerances["vertex_tol"] = {kVertexTol, "confocal::kVertexTol"};
  r.tolerances["report_digits"] = {9, "confocal::io::round9"};
}

inline std::optional<ConfocalPencil> try_pencil(const WeightedPointSet& ps, io::Report& r) {
  try {
    ConfocalPencil p = ConfocalPencil::from_points(ps);
    r.pencil = summarize(p);
    return p;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateSpectrum) throw;
    r.warnings.push_back(e.what());
    return std::nullopt;
  }
}

inline void note_degenerate(const JacobiCoordinates& jc, io::Report& r) {
  for (std::size_t i = 0; i < jc.degenerate.size(); ++i)
    if (jc.degenerate[i])
      r.warnings.push_back("Jacobi coordinate " + std::to_string(i + 1) + " coincides with a pole");
}

inline Matrix covariance_from(const std::vector<double>& c, Eigen::Index k) {
  const auto n = static_cast<Eigen::Index>(c.size());
  Matrix g(k, k);
  if (n == k * k) {
    g = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(c.data(), k, k);
  } else if (n == k * (k + 1) / 2) {
    Eigen::Index t = 0;
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = i; j < k; ++j) g(i, j) = g(j, i) = c[static_cast<std::size_t>(t++)];
  } else {
    throw UsageError("--error-cov needs k(k+1)/2 upper-triangular or k*k values");
  }
  return g;
}

inline std::uint64_t fit_seed() {
  const char* env = std::getenv("CONFOCAL_FIT_SEED");
  if (!env || !*env) return kDefaultFitSeed;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') throw UsageError("CONFOCAL_FIT_SEED must be a decimal integer");
  return v;
}

}  // namespace detail

inline io::Report build_report(const Options& o, const io::Dataset& ds, const std::vector<std::string>& args) {
  using namespace detail;
  const WeightedPointSet ps = ds.points();
  const Eigen::Index k = ps.dim();
  io::Report r;
  r.command = o.command;
  r.args = args;
  r.dataset = {ds.path, ds.columns, static_cast<long>(ps.size()), static_cast<long>(k)};
  add_tolerances(r);

  if (o.command == "fit") {
    const Eigen::Index ell = o.ell > 0 ? o.ell : k - 1;
    try_pencil(ps, r);
    if (!o.through.empty()) {
      const Vector p = to_vector(o.through, k, "through");
      const auto [best, worst] = restricted_best_fit_flat(ps, p, ell);
      r.fits.push_back(fit_entry(best, "restricted"));
      r.fits.push_back(fit_entry(worst, "restricted"));
      const JacobiCoordinates jc = jacobi_coordinates(ConfocalPencil::from_points(ps), p);
      note_degenerate(jc, r);
      r.jacobi = jacobi_entry(p, jc);
    } else {
      r.fits.push_back(fit_entry(best_fit_flat(ps, ell), "orthogonal"));
      r.fits.push_back(fit_entry(worst_fit_flat(ps, ell), "orthogonal"));
    }
  } else if (o.command == "pca") {
    const Vector p = to_vector(o.at, k, "at");
    const RestrictedPcaResult pca = restricted_pca(ps, p);
    r.pencil = summarize(ConfocalPencil::from_points(ps));
    r.pca = io::PcaEntry{p, pca.directions, pca.moments, pca.tied};
    r.jacobi = jacobi_entry(p, pca.lambdas);
    note_degenerate(pca.lambdas, r);
    if (pca.tied) r.warnings.push_back("principal moments at the point are tied; directions are not unique");
  } else if (o.command == "directional") {
    const Vector w = to_vector(o.dir, k, "dir");
    try_pencil(ps, r);
    r.fits.push_back(fit_entry(directional_fit(ps, w), "directional"));
    if (!o.through.empty()) {
      const Vector p = to_vector(o.through, k, "through");
      r.fits.push_back(fit_entry(directional_fit(ps, w, p), "directional_restricted"));
      const TestReport t = nested_f_test(ps, w, p);
      r.test = io::TestEntry{"nested_f", t.statistic, t.df1, t.df2, t.p_value, t.reference_moment, t.restricted_moment};
    }
  } else if (o.command == "test-point") {
    const Vector p = to_vector(o.at, k, "at");
    const SymmetricOperator g(covariance_from(o.error_cov, k));
    try_pencil(ps, r);
    const TestReport t = point_hypothesis_test(ps, p, g);
    r.test = io::TestEntry{"point_hypothesis", t.statistic, t.df1, std::nullopt, t.p_value, t.reference_moment,
                           t.restricted_moment};
    r.warnings.push_back("statistic computed in whitened coordinates G^(-1/2) x");
  } else if (o.command == "pencil") {
    const ConfocalPencil pen = ConfocalPencil::from_points(ps);
    r.pencil = summarize(pen);
    if (!o.jacobi.empty()) {
      const Vector p = to_vector(o.jacobi, k, "jacobi");
      const JacobiCoordinates jc = jacobi_coordinates(pen, p);
      note_degenerate(jc, r);
      r.jacobi = jacobi_entry(p, jc);
    }
  } else if (o.command == "regularize") {
    NormKind kind;
    if (o.norm == "l1") kind = NormKind::L1;
    else if (o.norm == "l2") kind = NormKind::L2;
    else throw UsageError("--norm must be l1 or l2");
    const std::uint64_t seed = fit_seed();
    try_pencil(ps, r);
    const ConstrainedFit fit = constrained_fit(ps, kind, o.bound, seed);
    const Hyperplane plane = fit.coefficients.hyperplane();
    std::vector<long> zeros(fit.zero_coordinates.begin(), fit.zero_coordinates.end());
    r.regularize = io::RegularizeEntry{o.norm, o.bound, seed, fit.coefficients.values(), fit.moment,
                                       fit.constraint_active, zeros, fit.kkt_residual,
                                       std::abs(plane.signed_distance(centroid(ps)))};
    r.fits.push_back(fit_entry(confocal::detail::flat_of(plane), plane, fit.moment, "best", "regularized_" + o.norm));
  } else if (o.command == "billiard") {
    const ConfocalPencil pen = ConfocalPencil::from_points(ps);
    r.pencil = summarize(pen);
    const QuadricMember member(pen, o.member);
    const Ray start(to_vector(o.start, k, "start"), to_vector(o.dir, k, "dir"));
    io::BilliardEntry b{o.member, member.type_index(), {}, {}, {}, {}};
    for (const Ray& ray : trajectory(member, start, o.bounces)) {
      b.rays.push_back({ray.point, ray.direction});
      try {
        b.caustics.push_back(caustics_of_flat(pen, ray.line()).lambdas);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateFlat) throw;
        b.caustics.emplace_back();
        r.warnings.push_back(std::string("segment ") + std::to_string(b.rays.size() - 1) + ": " + e.what());
      }
      b.axial_moments.push_back(axial_moment(ps, ray.line()));
      if (k == 2) b.joachimsthal.push_back(joachimsthal_2d(member, ray).value);
    }
    r.billiard = std::move(b);
  } else if (o.command == "plot") {
    if (k != 2) throw Error(ErrorCode::NotPlanar, "plots need two coordinates");
    try_pencil(ps, r);
    std::optional<Vector> p;
    if (!o.through.empty()) {
      p = to_vector(o.through, k, "through");
      r.jacobi = jacobi_entry(*p, jacobi_coordinates(ConfocalPencil::from_points(ps), *p));
    }
    if (!o.dir.empty()) {
      const Vector w = to_vector(o.dir, k, "dir");
      r.fits.push_back(fit_entry(directional_fit(ps, w, p), p ? "directional_restricted" : "directional"));
    } else if (p) {
      const auto [best, worst] = restricted_best_fit_flat(ps, *p, 1);
      r.fits.push_back(fit_entry(best, "restricted"));
      r.fits.push_back(fit_entry(worst, "restricted"));
    } else {
      r.fits.push_back(fit_entry(best_fit_flat(ps, 1), "orthogonal"));
    }
    io::SvgCounts counts;
    const std::string svg = io::emit_svg(r, ps, &counts);
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw UsageError("cannot write " + o.out);
    f << svg;
    r.plot = io::PlotEntry{o.out, counts.points, counts.conics, counts.lines};
  } else {
    throw UsageError("unknown command " + o.command);
  }
  return r;
}

inline std::vector<std::string> read_batch(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open batch list " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = io::detail::trim(line);
    if (!t.empty() && t.front() != '#') out.emplace_back(t);
  }
  return out;
}

inline void emit_error(std::ostream& err, const std::string& code, const std::string& message) {
  io::Json j{{"error", {{"code", code}, {"message", message}}}};
  err << j.dump() << "\n";
}

// argv without the program name.
inline int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Confocal-pencil regression toolkit", "confocal"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool needs_out) {
    auto* data = sub->add_option("data", o.data, "CSV file with a header row");
    auto* batch = sub->add_option("--batch", o.batch, "file listing one CSV path per line");
    data->excludes(batch);
    sub->add_option("--cols", o.cols, "coordinate columns, in order")->delimiter(',');
    sub->add_option("--mass-col", o.mass_col, "column holding point masses");
    auto* outp = sub->add_option("--out", o.out, needs_out ? "SVG output path" : "write the JSON report here");
    if (needs_out) outp->required();
  };
  auto vec = [&](CLI::App* sub, const std::string& name, std::vector<double>& target, const std::string& help) {
    return sub->add_option(name, target, help)->delimiter(',')->allow_extra_args(false);
  };

  auto* fit = app.add_subcommand("fit", "best and worst flats, optionally through a point");
  common(fit, false);
  fit->add_option("--ell", o.ell, "flat dimension (default k-1)")->check(CLI::PositiveNumber);
  vec(fit, "--through", o.through, "restrict to flats through this point");

  auto* pca = app.add_subcommand("pca", "principal directions and moments at a point");
  common(pca, false);
  vec(pca, "--at", o.at, "point")->required();

  auto* dirc = app.add_subcommand("directional", "regression along a direction");
  common(dirc, false);
  vec(dirc, "--dir", o.dir, "direction of deviations")->required();
  vec(dirc, "--through", o.through, "restrict to hyperplanes through this point");

  auto* test = app.add_subcommand("test-point", "hypothesis test that the fitted hyperplane passes through a point");
  common(test, false);
  vec(test, "--at", o.at, "hypothesised point")->required();
  vec(test, "--error-cov", o.error_cov, "error covariance, upper triangle or full")->required();

  auto* pen = app.add_subcommand("pencil", "confocal pencil of the data");
  common(pen, false);
  vec(pen, "--jacobi", o.jacobi, "report Jacobi coordinates of this point");

  auto* reg = app.add_subcommand("regularize", "norm-bounded orthogonal fit");
  common(reg, false);
  reg->add_option("--norm", o.norm, "l1 or l2")->required()->check(CLI::IsMember({"l1", "l2"}));
  reg->add_option("--bound", o.bound, "norm bound on the coefficients")->required()->check(CLI::PositiveNumber);

  auto* bil = app.add_subcommand("billiard", "billiard trajectory inside a pencil member");
  common(bil, false);
  bil->add_option("--member", o.member, "pencil parameter of the table")->required();
  vec(bil, "--start", o.start, "start point")->required();
  vec(bil, "--dir", o.dir, "start direction")->required();
  bil->add_option("--bounces", o.bounces, "number of reflections")->required()->check(CLI::NonNegativeNumber);

  auto* plot = app.add_subcommand("plot", "SVG figure for planar data");
  common(plot, true);
  vec(plot, "--through", o.through, "draw the conics and restricted lines through this point");
  vec(plot, "--dir", o.dir, "draw the directional line instead");

  std::vector<std::string> rev(argv.rbegin(), argv.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "usage", e.what());
    return kExitUsage;
  }
  for (auto* sub : app.get_subcommands()) o.command = sub->get_name();

  try {
    if (o.data.empty() && o.batch.empty()) throw UsageError("a dataset path or --batch is required");
    io::DatasetOptions dopt{o.cols, o.mass_col.empty() ? std::nullopt : std::optional<std::string>(o.mass_col)};
    std::string text;
    if (o.batch.empty()) {
      text = io::to_json(build_report(o, io::parse_dataset(o.data, dopt), argv)).dump(2);
    } else {
      io::Json all = io::Json::array();
      for (const auto& path : read_batch(o.batch)) all.push_back(io::to_json(build_report(o, io::parse_dataset(path, dopt), argv)));
      text = all.dump(2);
    }
    if (!o.out.empty() && o.command != "plot") {
      std::ofstream f(o.out, std::ios::binary);
      if (!f) throw UsageError("cannot write " + o.out);
      f << text << "\n";
    } else {
      out << text << "\n";
    }
    return kExitOk;
  } catch (const UsageError& e) {
    emit_error(err, "usage", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    emit_error(err, std::string(code_name(e.code())), e.what());
    return kExitDomain;
  }
}

}  // namespace confocal::cli
