#pragma once

#include "descent/manifold.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace descent {

struct TraceRecord {
  std::int64_t k = 0;
  Vector x;
  double f_value = 0.0;
  std::optional<double> gap;  // f - f* when a minimizer is known
  double grad_norm = 0.0;
  double alpha = 0.0;  // record 0 has alpha = beta = 0 by convention
  double beta = 0.0;
  std::optional<Vector> xi;
  std::optional<double> dist_to_opt;
};

enum class RunStatus {
  Completed,          // max_iters reached
  GradientConverged,  // ||grad|| <= grad_tol (tol > 0)
  AbortedNonFinite,   // NaN/inf encountered; abort_k names the iteration
};

inline std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::GradientConverged: return "gradient_converged";
    case RunStatus::AbortedNonFinite: return "aborted_nonfinite";
  }
  return "?";
}

/// Per-iteration record of one run, k strictly increasing from 0.
struct Trace {
  std::vector<TraceRecord> records;
  RunStatus status = RunStatus::Completed;
  std::int64_t abort_k = -1;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> meta;

  void append(TraceRecord rec) {
    const std::int64_t expected = records.empty() ? 0 : records.back().k + 1;
    if (rec.k != expected)
      throw std::logic_error("trace records must have k strictly increasing from 0");
    if (rec.gap && *rec.gap < -1e-10)
      throw std::logic_error("trace gap fell below -1e-10 at k=" + std::to_string(rec.k) +
                             ": the declared minimizer is not a minimizer");
    records.push_back(std::move(rec));
  }

  const TraceRecord& back() const { return records.back(); }
  std::int64_t last_k() const { return records.empty() ? -1 : records.back().k; }
};

}  // namespace descent
