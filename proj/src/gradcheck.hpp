#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tape.hpp"

namespace nee {

// A differentiable scalar function of a list of input tensors, built through
// the supplied tape.
using ScalarFn = std::function<Tensor(Tape&, const std::vector<Tensor>&)>;

struct GradCheckReport {
  bool pass = false;
  double max_rel_error = 0.0;
  // Set when central differences at eps and eps/2 disagree wildly at the
  // worst coordinate — the usual signature of evaluating at (or across) a
  // non-differentiable point, which violates the precondition.
  bool discontinuity_suspected = false;
  std::string worst_coordinate;
  size_t coordinates_checked = 0;
};

// Compares the tape gradient of fn at `point` against central finite
// differences, coordinate by coordinate. fn must be built from tape
// primitives and be differentiable at `point`.
GradCheckReport grad_check(const ScalarFn& fn, const std::vector<Tensor>& point,
                           double epsilon, double tolerance);

}  // namespace nee
