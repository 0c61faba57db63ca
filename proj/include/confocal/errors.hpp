#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace confocal {

enum class ErrorCode {
  RankDeficient,
  DegenerateSpectrum,
  NotSymmetric,
  DirectionParallel,
  DirectionDegenerate,
  PointNotOnQuadric,
  InvalidSemiaxes,
  NonUnitMasses,
  BadCovariance,
  BadDegrees,
  ZeroVector,
  NoEnvelope,
  NoIntersection,
  NotEllipsoidType,
  DegenerateFlat,
  InvalidArgument,
  ParseError,
  EmptyDataset,
  NotPlanar,
};

// Stable machine-readable names, used by the CLI.
constexpr std::string_view code_name(ErrorCode c) noexcept {
  switch (c) {
    case ErrorCode::RankDeficient: return "rank_deficient";
    case ErrorCode::DegenerateSpectrum: return "degenerate_spectrum";
    case ErrorCode::NotSymmetric: return "not_symmetric";
    case ErrorCode::DirectionParallel: return "direction_parallel";
    case ErrorCode::DirectionDegenerate: return "direction_degenerate";
    case ErrorCode::PointNotOnQuadric: return "point_not_on_quadric";
    case ErrorCode::InvalidSemiaxes: return "invalid_semiaxes";
    case ErrorCode::NonUnitMasses: return "non_unit_masses";
    case ErrorCode::BadCovariance: return "bad_covariance";
    case ErrorCode::BadDegrees: return "bad_degrees";
    case ErrorCode::ZeroVector: return "zero_vector";
    case ErrorCode::NoEnvelope: return "no_envelope";
    case ErrorCode::NoIntersection: return "no_intersection";
    case ErrorCode::NotEllipsoidType: return "not_ellipsoid_type";
    case ErrorCode::DegenerateFlat: return "degenerate_flat";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::ParseError: return "parse_error";
    case ErrorCode::EmptyDataset: return "empty_dataset";
    case ErrorCode::NotPlanar: return "not_planar";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace confocal
