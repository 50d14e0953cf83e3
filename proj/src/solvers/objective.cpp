#include "cestfit/solvers/objective.hpp"

#include "cestfit/errors.hpp"

namespace cestfit::solvers {

void Objective::validate() const {
    inputs.validate();
    if (target.size() != inputs.total_points())
        throw LengthMismatch("Objective: target length " + std::to_string(target.size()) +
                             " != stacked grid length " + std::to_string(inputs.total_points()));
}

double Objective::value(std::span<const double> params) const {
    const std::vector<double> y = eval_model(inputs, params);
    ++function_evals;
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - target[i];
        sum += r * r;
    }
    return sum;
}

Objective::ValueGrad Objective::value_and_gradient(std::span<const double> params) const {
    const models::JacobianResult jac = model_jacobian(inputs, params);
    const std::vector<double> y = eval_model(inputs, params);
    function_evals += 1;
    if (jac.mode == models::GradientMode::FiniteDifference)
        function_evals += 2 * static_cast<long>(params.size());

    ValueGrad out;
    out.mode = jac.mode;
    Eigen::VectorXd r(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i)
        r[static_cast<Eigen::Index>(i)] = y[i] - target[i];
    out.value = r.squaredNorm();
    const Eigen::VectorXd g = 2.0 * (jac.j.transpose() * r);
    out.grad.assign(g.data(), g.data() + g.size());
    return out;
}

} // namespace cestfit::solvers
