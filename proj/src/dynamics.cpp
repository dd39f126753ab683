#include "dynlap/dynamics.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "dynlap/log.hpp"

namespace dynlap {

namespace {

double wrap_2pi(double v) {
    double w = std::fmod(v, two_pi);
    if (w < 0.0) w += two_pi;
    return w;
}

void check_finite(const Vec2& x, const char* what) {
    if (!std::isfinite(x.x()) || !std::isfinite(x.y())) {
        std::ostringstream msg;
        msg << what << " produced a non-finite state (" << x.x() << ", "
            << x.y() << ")";
        throw std::runtime_error(msg.str());
    }
}

}  // namespace

Vec2 std_map_forward(double a, const Vec2& p) {
    const double s = a * std::sin(p.x());
    return {wrap_2pi(p.x() + p.y() + s), wrap_2pi(p.y() + s)};
}

Vec2 std_map_backward(double a, const Vec2& p) {
    const double x = wrap_2pi(p.x() - p.y());
    return {x, wrap_2pi(p.y() - a * std::sin(x))};
}

FlowSystem FlowSystem::standard_map(double a, int iterates) {
    if (iterates < 1) throw std::invalid_argument("standard_map: iterates must be >= 1");
    FlowSystem sys;
    sys.kind_ = Kind::discrete_map;
    sys.domain_ = Domain::torus();
    sys.name_ = "standard_map";
    sys.iterates_ = iterates;
    sys.map_forward_ = [a](const Vec2& p) { return std_map_forward(a, p); };
    sys.map_backward_ = [a](const Vec2& p) { return std_map_backward(a, p); };
    return sys;
}

FlowSystem FlowSystem::cylinder_flow(double t0, double tf, int rk4_steps) {
    constexpr double c = 0.5;
    constexpr double nu = 0.25;
    constexpr double eps_forcing = 0.25;
    const double two_sqrt5 = 2.0 * std::sqrt(5.0);

    auto field = [=](const Vec2& p, double t) -> Vec2 {
        const double A = 1.0 + 0.125 * std::sin(two_sqrt5 * t);
        const double u = p.x() - nu * t;
        const double g =
            std::sin(u) * std::sin(p.y()) + 0.5 * p.y() - 0.25 * pi;
        const double G = 1.0 / ((g * g + 1.0) * (g * g + 1.0));
        return {c - A * std::sin(u) * std::cos(p.y()) +
                    eps_forcing * G * std::sin(0.5 * t),
                A * std::cos(u) * std::sin(p.y())};
    };
    auto jacobian = [=](const Vec2& p, double t) -> Mat2 {
        const double A = 1.0 + 0.125 * std::sin(two_sqrt5 * t);
        const double u = p.x() - nu * t;
        const double su = std::sin(u), cu = std::cos(u);
        const double sy = std::sin(p.y()), cy = std::cos(p.y());
        const double g = su * sy + 0.5 * p.y() - 0.25 * pi;
        const double d = g * g + 1.0;
        const double Gp = -4.0 * g / (d * d * d);
        const double gx = cu * sy;
        const double gy = su * cy + 0.5;
        const double f = eps_forcing * std::sin(0.5 * t);
        Mat2 J;
        J << -A * cu * cy + f * Gp * gx, A * su * sy + f * Gp * gy,
            -A * su * sy, A * cu * cy;
        return J;
    };

    FlowSystem sys;
    sys.kind_ = Kind::ode_flow;
    sys.domain_ = Domain::cylinder();
    sys.name_ = "cylinder_flow";
    sys.field_ = field;
    sys.field_jacobian_ = jacobian;
    sys.t0_ = t0;
    sys.tf_ = tf;
    sys.rk4_steps_ = rk4_steps;
    if (tf <= t0) throw std::invalid_argument("cylinder_flow: tf must exceed t0");
    if (rk4_steps < 1) throw std::invalid_argument("cylinder_flow: rk4_steps must be >= 1");
    return sys;
}

FlowSystem FlowSystem::identity(Domain domain) {
    FlowSystem sys;
    sys.kind_ = Kind::ode_flow;
    sys.domain_ = std::move(domain);
    sys.name_ = "identity";
    sys.field_ = [](const Vec2&, double) { return Vec2{0.0, 0.0}; };
    sys.field_jacobian_ = [](const Vec2&, double) { return Mat2::Zero().eval(); };
    sys.t0_ = 0.0;
    sys.tf_ = 1.0;
    sys.rk4_steps_ = 1;
    return sys;
}

FlowSystem FlowSystem::from_field(Domain domain, std::string name, Field field,
                                  FieldJacobian jacobian, double t0, double tf,
                                  int rk4_steps) {
    if (!field) throw std::invalid_argument("from_field: vector field is required");
    if (tf <= t0) throw std::invalid_argument("from_field: tf must exceed t0");
    if (rk4_steps < 1) throw std::invalid_argument("from_field: rk4_steps must be >= 1");
    FlowSystem sys;
    sys.kind_ = Kind::ode_flow;
    sys.domain_ = std::move(domain);
    sys.name_ = std::move(name);
    sys.field_ = std::move(field);
    sys.field_jacobian_ = std::move(jacobian);
    sys.t0_ = t0;
    sys.tf_ = tf;
    sys.rk4_steps_ = rk4_steps;
    return sys;
}

FlowSystem FlowSystem::from_map(Domain domain, std::string name, Map forward,
                                Map backward, int iterates) {
    if (!forward) throw std::invalid_argument("from_map: forward map is required");
    if (iterates < 1) throw std::invalid_argument("from_map: iterates must be >= 1");
    FlowSystem sys;
    sys.kind_ = Kind::discrete_map;
    sys.domain_ = std::move(domain);
    sys.name_ = std::move(name);
    sys.map_forward_ = std::move(forward);
    sys.map_backward_ = std::move(backward);
    sys.iterates_ = iterates;
    return sys;
}

bool FlowSystem::has_backward() const {
    return kind_ == Kind::ode_flow || static_cast<bool>(map_backward_);
}

int FlowSystem::steps_for_interval(double t_start, double t_end) const {
    const double window = tf_ - t0_;
    const double fraction = std::abs(t_end - t_start) / window;
    const long scaled = std::lround(fraction * static_cast<double>(rk4_steps_));
    return static_cast<int>(std::max(1L, scaled));
}

Vec2 FlowSystem::integrate(Vec2 x, double t_start, double t_end,
                           int steps) const {
    if (kind_ != Kind::ode_flow)
        throw std::logic_error("rk4 integration requires an ode-flow system");
    if (steps < 1) throw std::invalid_argument("rk4: steps must be >= 1");
    if (t_start == t_end) return x;
    const double h = (t_end - t_start) / steps;
    double t = t_start;
    for (int i = 0; i < steps; ++i) {
        const Vec2 k1 = field_(x, t);
        const Vec2 k2 = field_(x + 0.5 * h * k1, t + 0.5 * h);
        const Vec2 k3 = field_(x + 0.5 * h * k2, t + 0.5 * h);
        const Vec2 k4 = field_(x + h * k3, t + h);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = t_start + (i + 1) * h;
        check_finite(x, "rk4_flow");
        x = domain_.wrap(x);
    }
    return x;
}

Vec2 FlowSystem::forward(const Vec2& x) const {
    counters_->forward.fetch_add(1, std::memory_order_relaxed);
    if (kind_ == Kind::discrete_map) {
        Vec2 p = x;
        for (int i = 0; i < iterates_; ++i) p = domain_.wrap(map_forward_(p));
        check_finite(p, "forward map");
        return p;
    }
    return integrate(x, t0_, tf_, rk4_steps_);
}

Vec2 FlowSystem::backward(const Vec2& x) const {
    counters_->backward.fetch_add(1, std::memory_order_relaxed);
    if (kind_ == Kind::discrete_map) {
        if (!map_backward_)
            throw std::logic_error(
                "backward mapping is unsupported for this discrete map (no inverse)");
        Vec2 p = x;
        for (int i = 0; i < iterates_; ++i) p = domain_.wrap(map_backward_(p));
        check_finite(p, "backward map");
        return p;
    }
    return integrate(x, tf_, t0_, rk4_steps_);
}

Vec2 FlowSystem::forward_to(const Vec2& x, double t) const {
    counters_->forward.fetch_add(1, std::memory_order_relaxed);
    if (kind_ == Kind::discrete_map) {
        const int k = static_cast<int>(std::lround(t));
        if (k < 0) throw std::invalid_argument("forward_to: iterate count must be >= 0");
        Vec2 p = x;
        for (int i = 0; i < k; ++i) p = domain_.wrap(map_forward_(p));
        check_finite(p, "forward map");
        return p;
    }
    return integrate(x, t0_, t, steps_for_interval(t0_, t));
}

Vec2 FlowSystem::backward_from(const Vec2& x, double t) const {
    counters_->backward.fetch_add(1, std::memory_order_relaxed);
    if (kind_ == Kind::discrete_map) {
        if (!map_backward_)
            throw std::logic_error(
                "backward mapping is unsupported for this discrete map (no inverse)");
        const int k = static_cast<int>(std::lround(t));
        if (k < 0) throw std::invalid_argument("backward_from: iterate count must be >= 0");
        Vec2 p = x;
        for (int i = 0; i < k; ++i) p = domain_.wrap(map_backward_(p));
        check_finite(p, "backward map");
        return p;
    }
    return integrate(x, t, t0_, steps_for_interval(t, t0_));
}

std::vector<double> FlowSystem::comparison_times(int count) const {
    if (count < 1)
        throw std::invalid_argument("comparison_times: count must be >= 1");
    std::vector<double> times(static_cast<std::size_t>(count));
    if (kind_ == Kind::discrete_map) {
        if (count > iterates_)
            throw std::invalid_argument(
                "comparison_times: count exceeds the iterate count of the map");
        // Iterate indices ending at the full composition; count must divide.
        if (iterates_ % count != 0)
            throw std::invalid_argument(
                "comparison_times: count must divide the iterate count");
        const int stride = iterates_ / count;
        for (int i = 0; i < count; ++i)
            times[static_cast<std::size_t>(i)] = static_cast<double>((i + 1) * stride);
    } else {
        const double h = (tf_ - t0_) / count;
        for (int i = 0; i < count; ++i)
            times[static_cast<std::size_t>(i)] = t0_ + (i + 1) * h;
        times.back() = tf_;
    }
    return times;
}

Mat2 FlowSystem::jacobian_at(const Vec2& x, double t) const {
    if (field_jacobian_) return field_jacobian_(x, t);
    // Central finite differences of the field, used only when no analytic
    // Jacobian was supplied.
    const double h = 1e-6;
    Mat2 J;
    for (int k = 0; k < 2; ++k) {
        Vec2 e = Vec2::Zero();
        e[k] = h;
        const Vec2 diff = field_(x + e, t) - field_(x - e, t);
        J.col(k) = diff / (2.0 * h);
    }
    return J;
}

CauchyGreenInverse FlowSystem::cauchy_green_inverse(const Vec2& x) const {
    return cauchy_green_inverse(x, tf_);
}

CauchyGreenInverse FlowSystem::cauchy_green_inverse(const Vec2& x,
                                                    double t_end) const {
    if (kind_ != Kind::ode_flow)
        throw std::logic_error(
            "cauchy_green_inverse requires an ode-flow system");
    // Augmented backward integration of (state, Jacobian) from the forward
    // image: z' = F(z,t), B' = DF(z,t) B, starting at (Phi(x,t0,t_end), I).
    const int steps = steps_for_interval(t0_, t_end);
    Vec2 z = integrate(x, t0_, t_end, steps);
    Mat2 B = Mat2::Identity();
    const double h = (t0_ - t_end) / steps;
    double t = t_end;
    for (int i = 0; i < steps; ++i) {
        const Vec2 k1 = field_(z, t);
        const Mat2 K1 = jacobian_at(z, t) * B;
        const Vec2 z2 = z + 0.5 * h * k1;
        const Vec2 k2 = field_(z2, t + 0.5 * h);
        const Mat2 K2 = jacobian_at(z2, t + 0.5 * h) * (B + 0.5 * h * K1);
        const Vec2 z3 = z + 0.5 * h * k2;
        const Vec2 k3 = field_(z3, t + 0.5 * h);
        const Mat2 K3 = jacobian_at(z3, t + 0.5 * h) * (B + 0.5 * h * K2);
        const Vec2 z4 = z + h * k3;
        const Vec2 k4 = field_(z4, t + h);
        const Mat2 K4 = jacobian_at(z4, t + h) * (B + h * K3);
        z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        B += (h / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4);
        t = t_end + (i + 1) * h;
        check_finite(z, "cauchy_green_inverse");
        z = domain_.wrap(z);
    }

    CauchyGreenInverse result;
    Mat2 M = B * B.transpose();
    // Enforce exact symmetry (the product is symmetric up to rounding).
    M(0, 1) = M(1, 0) = 0.5 * (M(0, 1) + M(1, 0));
    result.matrix = M;
    const double tr = M.trace();
    const double det = M.determinant();
    const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    const double lo = 0.5 * tr - disc;
    const double hi = 0.5 * tr + disc;
    result.condition = (lo > 0.0) ? hi / lo
                                  : std::numeric_limits<double>::infinity();
    if (!(result.condition < 1e12)) {
        logging::warn("cauchy_green_inverse: nearly singular result at (", x.x(),
                      ", ", x.y(), "), condition ", result.condition);
    }
    return result;
}

void FlowSystem::reset_evaluation_counters() const {
    counters_->forward.store(0);
    counters_->backward.store(0);
}

Vec2 rk4_flow(const FlowSystem& system, const Vec2& x, double t_start,
              double t_end, int steps) {
    return system.integrate(x, t_start, t_end, steps);
}

}  // namespace dynlap
