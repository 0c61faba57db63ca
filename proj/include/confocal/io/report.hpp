#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "confocal/geometry.hpp"

namespace confocal::io {

using Json = nlohmann::ordered_json;

struct DatasetSummary {
  std::string path;
  std::vector<std::string> columns;
  long n = 0;
  long k = 0;
};

struct AttachEntry {
  long index = 0;
  Vector plus;
  Vector minus;
};

struct PencilSummary {
  Vector center;
  Matrix frame;  // columns are principal axes
  Vector poles;
  Vector principal_moments;
  double mass = 0;
  double gyration_moment = 0;
  std::vector<AttachEntry> attached_points;
};

struct FitEntry {
  std::string role;
  std::string kind;
  Vector base_point;
  Matrix basis;  // columns
  std::optional<Vector> normal;
  std::optional<double> offset;
  double moment = 0;
  std::optional<double> slope;
  std::optional<double> intercept;
};

struct JacobiEntry {
  Vector point;
  Vector point_principal;
  Vector lambdas;
  std::vector<bool> degenerate;
};

struct TestEntry {
  std::string kind;
  double statistic = 0;
  long df1 = 0;
  std::optional<long> df2;  // empty means infinity
  double p_value = 0;
  double reference_moment = 0;
  double restricted_moment = 0;
};

struct PcaEntry {
  Vector point;
  Matrix directions;
  Vector moments;
  bool tied = false;
};

struct RegularizeEntry {
  std::string norm;
  double bound = 0;
  std::uint64_t seed = 0;
  Vector coefficients;
  double moment = 0;
  bool active = false;
  std::vector<long> zero_coordinates;
  double kkt_residual = 0;
  double centroid_distance = 0;
};

struct RayEntry {
  Vector point;
  Vector direction;
};

struct BilliardEntry {
  double member = 0;
  long type_index = 0;
  std::vector<RayEntry> rays;
  std::vector<std::vector<double>> caustics;  // one set per segment
  std::vector<double> axial_moments;          // one per segment
  std::vector<double> joachimsthal;           // planar members only
};

struct PlotEntry {
  std::string path;
  long points = 0;
  long conics = 0;
  long lines = 0;
};

struct Tolerance {
  double value = 0;
  std::string source;
};

struct Report {
  std::string command;
  std::vector<std::string> args;
  DatasetSummary dataset;
  std::optional<PencilSummary> pencil;
  std::vector<FitEntry> fits;
  std::optional<JacobiEntry> jacobi;
  std::optional<TestEntry> test;
  std::optional<PcaEntry> pca;
  std::optional<RegularizeEntry> regularize;
  std::optional<BilliardEntry> billiard;
  std::optional<PlotEntry> plot;
  std::vector<std::string> warnings;
  std::map<std::string, Tolerance> tolerances;
};

// 9 significant digits.
inline double round9(double x) {
  if (!std::isfinite(x) || x == 0) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return std::strtod(buf, nullptr);
}

namespace detail {

inline Json num(double x) {
  if (!std::isfinite(x)) return Json(nullptr);
  return x == 0 ? Json(0.0) : Json(round9(x));
}

inline Json vec(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

inline Json cols(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j) a.push_back(vec(m.col(j)));
  return a;
}

inline double get_num(const Json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

inline Vector get_vec(const Json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = get_num(j[i]);
  return v;
}

inline Matrix get_cols(const Json& j) {
  if (j.empty()) return Matrix();
  Matrix m(static_cast<Eigen::Index>(j[0].size()), static_cast<Eigen::Index>(j.size()));
  for (std::size_t c = 0; c < j.size(); ++c) m.col(static_cast<Eigen::Index>(c)) = get_vec(j[c]);
  return m;
}

inline std::vector<double> get_list(const Json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(get_num(x));
  return out;
}

inline Json list(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

}  // namespace detail

inline Json to_json(const Report& r) {
  using namespace detail;
  Json j;
  j["command"] = r.command;
  j["args"] = r.args;
  j["dataset"] = {{"path", r.dataset.path}, {"columns", r.dataset.columns}, {"n", r.dataset.n}, {"k", r.dataset.k}};
  if (r.pencil) {
    const auto& p = *r.pencil;
    Json att = Json::array();
    for (const auto& a : p.attached_points) att.push_back({{"index", a.index}, {"plus", vec(a.plus)}, {"minus", vec(a.minus)}});
    j["pencil"] = {{"center", vec(p.center)},
                   {"frame", cols(p.frame)},
                   {"poles", vec(p.poles)},
                   {"principal_moments", vec(p.principal_moments)},
                   {"mass", num(p.mass)},
                   {"gyration_moment", num(p.gyration_moment)},
                   {"attached_points", att}};
  } else {
    j["pencil"] = nullptr;
  }
  j["fits"] = Json::array();
  for (const auto& f : r.fits) {
    Json e{{"role", f.role}, {"kind", f.kind}, {"base_point", vec(f.base_point)}, {"basis", cols(f.basis)}};
    e["normal"] = f.normal ? vec(*f.normal) : Json(nullptr);
    e["offset"] = f.offset ? num(*f.offset) : Json(nullptr);
    e["moment"] = num(f.moment);
    e["slope"] = f.slope ? num(*f.slope) : Json(nullptr);
    e["intercept"] = f.intercept ? num(*f.intercept) : Json(nullptr);
    j["fits"].push_back(e);
  }
  if (r.jacobi) {
    const auto& q = *r.jacobi;
    j["jacobi"] = {{"point", vec(q.point)},
                   {"point_principal", vec(q.point_principal)},
                   {"lambdas", vec(q.lambdas)},
                   {"degenerate", q.degenerate}};
  } else {
    j["jacobi"] = nullptr;
  }
  if (r.test) {
    const auto& t = *r.test;
    j["test"] = {{"kind", t.kind},
                 {"statistic", num(t.statistic)},
                 {"df1", t.df1},
                 {"df2", t.df2 ? Json(*t.df2) : Json(nullptr)},
                 {"p_value", num(t.p_value)},
                 {"reference_moment", num(t.reference_moment)},
                 {"restricted_moment", num(t.restricted_moment)}};
  } else {
    j["test"] = nullptr;
  }
  if (r.pca)
    j["pca"] = {{"point", vec(r.pca->point)},
                {"directions", cols(r.pca->directions)},
                {"moments", vec(r.pca->moments)},
                {"tied", r.pca->tied}};
  if (r.regularize) {
    const auto& g = *r.regularize;
    j["regularize"] = {{"norm", g.norm},
                       {"bound", num(g.bound)},
                       {"seed", g.seed},
                       {"coefficients", vec(g.coefficients)},
                       {"moment", num(g.moment)},
                       {"active", g.active},
                       {"zero_coordinates", g.zero_coordinates},
                       {"kkt_residual", num(g.kkt_residual)},
                       {"centroid_distance", num(g.centroid_distance)}};
  }
  if (r.billiard) {
    const auto& b = *r.billiard;
    Json rays = Json::array();
    for (const auto& ray : b.rays) rays.push_back({{"point", vec(ray.point)}, {"direction", vec(ray.direction)}});
    Json caus = Json::array();
    for (const auto& c : b.caustics) caus.push_back(list(c));
    j["billiard"] = {{"member", num(b.member)},
                     {"type_index", b.type_index},
                     {"rays", rays},
                     {"caustics", caus},
                     {"axial_moments", list(b.axial_moments)},
                     {"joachimsthal", list(b.joachimsthal)}};
  }
  if (r.plot)
    j["plot"] = {{"path", r.plot->path}, {"points", r.plot->points}, {"conics", r.plot->conics}, {"lines", r.plot->lines}};
  j["warnings"] = r.warnings;
  Json tol = Json::object();
  for (const auto& [name, t] : r.tolerances) tol[name] = {{"value", t.value}, {"source", t.source}};
  j["tolerances"] = tol;
  return j;
}

inline Report from_json(const Json& j) {
  using namespace detail;
  Report r;
  r.command = j.at("command").get<std::string>();
  r.args = j.at("args").get<std::vector<std::string>>();
  const auto& d = j.at("dataset");
  r.dataset = {d.at("path").get<std::string>(), d.at("columns").get<std::vector<std::string>>(), d.at("n").get<long>(),
               d.at("k").get<long>()};
  if (!j.at("pencil").is_null()) {
    const auto& p = j["pencil"];
    PencilSummary s{get_vec(p.at("center")), get_cols(p.at("frame")), get_vec(p.at("poles")),
                    get_vec(p.at("principal_moments")), get_num(p.at("mass")), get_num(p.at("gyration_moment")), {}};
    for (const auto& a : p.at("attached_points"))
      s.attached_points.push_back({a.at("index").get<long>(), get_vec(a.at("plus")), get_vec(a.at("minus"))});
    r.pencil = std::move(s);
  }
  for (const auto& f : j.at("fits")) {
    FitEntry e{f.at("role").get<std::string>(), f.at("kind").get<std::string>(), get_vec(f.at("base_point")),
               get_cols(f.at("basis")), std::nullopt, std::nullopt, get_num(f.at("moment")), std::nullopt,
               std::nullopt};
    if (!f.at("normal").is_null()) e.normal = get_vec(f["normal"]);
    if (!f.at("offset").is_null()) e.offset = get_num(f["offset"]);
    if (!f.at("slope").is_null()) e.slope = get_num(f["slope"]);
    if (!f.at("intercept").is_null()) e.intercept = get_num(f["intercept"]);
    r.fits.push_back(std::move(e));
  }
  if (!j.at("jacobi").is_null()) {
    const auto& q = j["jacobi"];
    r.jacobi = JacobiEntry{get_vec(q.at("point")), get_vec(q.at("point_principal")), get_vec(q.at("lambdas")),
                           q.at("degenerate").get<std::vector<bool>>()};
  }
  if (!j.at("test").is_null()) {
    const auto& t = j["test"];
    TestEntry e{t.at("kind").get<std::string>(), get_num(t.at("statistic")), t.at("df1").get<long>(), std::nullopt,
                get_num(t.at("p_value")), get_num(t.at("reference_moment")), get_num(t.at("restricted_moment"))};
    if (!t.at("df2").is_null()) e.df2 = t["df2"].get<long>();
    r.test = e;
  }
  if (j.contains("pca")) {
    const auto& p = j["pca"];
    r.pca = PcaEntry{get_vec(p.at("point")), get_cols(p.at("directions")), get_vec(p.at("moments")),
                     p.at("tied").get<bool>()};
  }
  if (j.contains("regularize")) {
    const auto& g = j["regularize"];
    r.regularize = RegularizeEntry{g.at("norm").get<std::string>(),
                                   get_num(g.at("bound")),
                                   g.at("seed").get<std::uint64_t>(),
                                   get_vec(g.at("coefficients")),
                                   get_num(g.at("moment")),
                                   g.at("active").get<bool>(),
                                   g.at("zero_coordinates").get<std::vector<long>>(),
                                   get_num(g.at("kkt_residual")),
                                   get_num(g.at("centroid_distance"))};
  }
  if (j.contains("billiard")) {
    const auto& b = j["billiard"];
    BilliardEntry e{get_num(b.at("member")), b.at("type_index").get<long>(), {}, {}, get_list(b.at("axial_moments")),
                    get_list(b.at("joachimsthal"))};
    for (const auto& ray : b.at("rays")) e.rays.push_back({get_vec(ray.at("point")), get_vec(ray.at("direction"))});
    for (const auto& c : b.at("caustics")) e.caustics.push_back(get_list(c));
    r.billiard = std::move(e);
  }
  if (j.contains("plot")) {
    const auto& p = j["plot"];
    r.plot = PlotEntry{p.at("path").get<std::string>(), p.at("points").get<long>(), p.at("conics").get<long>(),
                       p.at("lines").get<long>()};
  }
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  for (const auto& [name, t] : j.at("tolerances").items())
    r.tolerances[name] = {t.at("value").get<double>(), t.at("source").get<std::string>()};
  return r;
}

}  // namespace confocal::io
