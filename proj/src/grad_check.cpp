#include "neural_atoms/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace na {

GradCheckResult grad_check(const LossBuilder& f, std::span<Parameter* const> params, double eps) {
    if (!(eps >= 1e-7 && eps <= 1e-3)) throw std::invalid_argument("grad_check: eps must lie in [1e-7, 1e-3]");
    for (Parameter* p : params) p->zero_grad();
    {
        Tape tape;
        tape.backward(f(tape));
    }
    auto eval = [&f] {
        Tape tape;
        return f(tape).value().item();
    };

    GradCheckResult res;
    for (Parameter* p : params) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double saved = p->value[i];
            p->value[i] = saved + eps;
            const double up = eval();
            p->value[i] = saved - eps;
            const double down = eval();
            p->value[i] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double analytic = p->grad[i];
            const double err = std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
            if (err > res.max_rel_error) res = {err, p->name, i};
        }
    }
    return res;
}

}  // namespace na
