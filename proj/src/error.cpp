#include "hyperlin/error.hpp"
#include "hyperlin/types.hpp"

#include <algorithm>
#include <cmath>

namespace hyperlin {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonHyperbolic: return "NonHyperbolic";
    case ErrorCode::EmptySpectrum: return "EmptySpectrum";
    case ErrorCode::NotMixed: return "NotMixed";
    case ErrorCode::TargetTooTight: return "TargetTooTight";
    case ErrorCode::KTooSmall: return "KTooSmall";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::NonpositiveResult: return "NonpositiveResult";
    case ErrorCode::ConditionViolated: return "ConditionViolated";
    case ErrorCode::BandConditionViolated: return "BandConditionViolated";
    case ErrorCode::NonpositiveExponent: return "NonpositiveExponent";
    case ErrorCode::EtaNotAchievable: return "EtaNotAchievable";
    case ErrorCode::OriginUndefined: return "OriginUndefined";
    case ErrorCode::LeftDomain: return "LeftDomain";
    case ErrorCode::OutsideBox: return "OutsideBox";
    case ErrorCode::EtaTooLarge: return "EtaTooLarge";
    case ErrorCode::TailTooShort: return "TailTooShort";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DerivativeMismatch: return "DerivativeMismatch";
    case ErrorCode::InverseNewtonFailed: return "InverseNewtonFailed";
    case ErrorCode::GraphLeavesBox: return "GraphLeavesBox";
    case ErrorCode::SlowDecay: return "SlowDecay";
    case ErrorCode::NewtonFailed: return "NewtonFailed";
    case ErrorCode::LeafIntersectionFailed: return "LeafIntersectionFailed";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonHyperbolic:
    case ErrorCode::NotMixed:
    case ErrorCode::ConditionViolated:
    case ErrorCode::BandConditionViolated:
    case ErrorCode::HypothesisViolated:
    case ErrorCode::NonpositiveExponent:
      return 2;
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::EmptySpectrum:
      return 4;
    default:
      return 3;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

bool Box::contains(const Vec& x, double slack) const {
  for (int i = 0; i < dim(); ++i) {
    const double pad = slack > 0.0 ? slack * (hi[i] - lo[i]) : 0.0;
    if (!(x[i] >= lo[i] - pad && x[i] <= hi[i] + pad)) return false;
  }
  return true;
}

Box Box::centered(int dim, double half_width) {
  Box b;
  b.lo.assign(dim, -half_width);
  b.hi.assign(dim, half_width);
  return b;
}

Box Box::product(const Box& a, const Box& b) {
  Box out = a;
  out.lo.insert(out.lo.end(), b.lo.begin(), b.lo.end());
  out.hi.insert(out.hi.end(), b.hi.begin(), b.hi.end());
  return out;
}

Vec PointBatch::point(std::size_t i) const {
  Vec x(dim);
  for (int c = 0; c < dim; ++c) x[c] = data[c * count + i];
  return x;
}

void PointBatch::set_point(std::size_t i, const Vec& x) {
  for (int c = 0; c < dim; ++c) data[c * count + i] = x[c];
}

Vec gather(const Vec& x, const IndexSet& idx) {
  Vec out(static_cast<int>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = x[idx[i]];
  return out;
}

void scatter(Vec& x, const IndexSet& idx, const Vec& part) {
  for (std::size_t i = 0; i < idx.size(); ++i) x[idx[i]] = part[i];
}

Mat gather(const Mat& a, const IndexSet& rows, const IndexSet& cols) {
  Mat out(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = a(rows[i], cols[j]);
  return out;
}

IndexSet complement(const IndexSet& idx, int n) {
  IndexSet out;
  for (int i = 0; i < n; ++i)
    if (std::find(idx.begin(), idx.end(), i) == idx.end()) out.push_back(i);
  return out;
}

IndexSet concat(const IndexSet& a, const IndexSet& b) {
  IndexSet out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace hyperlin
