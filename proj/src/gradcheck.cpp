#include "gradcheck.hpp"

#include <cmath>

namespace nee {

namespace {

double eval_at(const ScalarFn& fn, const std::vector<Tensor>& point) {
  Tape tape(false);
  Tensor out = fn(tape, point);
  return out.scalar_value();
}

std::vector<Tensor> perturb(const std::vector<Tensor>& point, size_t which,
                            size_t coord, double delta) {
  std::vector<Tensor> p = point;
  std::vector<double> vals = point[which].values();
  vals[coord] += delta;
  p[which] = Tensor(point[which].shape(), std::move(vals),
                    point[which].requires_grad());
  return p;
}

}  // namespace

GradCheckReport grad_check(const ScalarFn& fn, const std::vector<Tensor>& point,
                           double epsilon, double tolerance) {
  for (const Tensor& t : point) {
    if (!all_finite(t.values())) {
      fail(ErrorKind::InvalidArgument, "grad_check: non-finite point");
    }
  }
  // analytic gradients
  std::vector<Tensor> inputs;
  inputs.reserve(point.size());
  for (const Tensor& t : point) {
    inputs.emplace_back(t.shape(), t.values(), /*requires_grad=*/true);
  }
  Tape tape(true);
  Tensor loss = fn(tape, inputs);
  if (loss.size() != 1) {
    fail(ErrorKind::InvalidArgument, "grad_check: fn must be scalar-valued");
  }
  tape.backward(loss);

  GradCheckReport report;
  size_t worst_input = 0, worst_coord = 0;
  for (size_t w = 0; w < inputs.size(); ++w) {
    const std::vector<double> analytic = tape.grad(inputs[w]);
    for (size_t c = 0; c < analytic.size(); ++c) {
      const double fp = eval_at(fn, perturb(point, w, c, epsilon));
      const double fm = eval_at(fn, perturb(point, w, c, -epsilon));
      const double numeric = (fp - fm) / (2.0 * epsilon);
      const double denom =
          std::max({std::fabs(analytic[c]), std::fabs(numeric), 1.0});
      const double rel = std::fabs(analytic[c] - numeric) / denom;
      ++report.coordinates_checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        worst_input = w;
        worst_coord = c;
      }
    }
  }
  report.pass = report.max_rel_error < tolerance;
  if (!report.pass) {
    report.worst_coordinate = "input " + std::to_string(worst_input) +
                              " coordinate " + std::to_string(worst_coord);
    // Richardson probe: a genuine smooth-gradient bug gives consistent
    // difference quotients across step sizes; a kink or jump does not.
    const double h1 = epsilon, h2 = epsilon / 2.0;
    auto quotient = [&](double h) {
      const double fp = eval_at(fn, perturb(point, worst_input, worst_coord, h));
      const double fm = eval_at(fn, perturb(point, worst_input, worst_coord, -h));
      return (fp - fm) / (2.0 * h);
    };
    const double q1 = quotient(h1), q2 = quotient(h2);
    const double qden = std::max({std::fabs(q1), std::fabs(q2), 1.0});
    if (std::fabs(q1 - q2) / qden > 10.0 * tolerance) {
      report.discontinuity_suspected = true;
      report.worst_coordinate +=
          " (difference quotients disagree across step sizes; "
          "non-differentiable point suspected — precondition violated)";
    }
  }
  return report;
}

}  // namespace nee
