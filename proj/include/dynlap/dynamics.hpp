#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dynlap/domain.hpp"
#include "dynlap/types.hpp"

namespace dynlap {

// Inverse Cauchy-Green tensor C^{-1} = B B^T at a point, with B the backward
// flow Jacobian D_z Phi(z, t_end, t0) evaluated at z = Phi(x, t0, t_end).
struct CauchyGreenInverse {
    Mat2 matrix = Mat2::Identity();
    // Condition number of B B^T (ratio of its eigenvalues); large values are
    // reported as warnings by cauchy_green_inverse, never as failures.
    double condition = 1.0;
};

// A forward/backward dynamical system on a 2-D domain: either a discrete map
// with an explicit inverse, or a nonautonomous ODE flow integrated with
// fixed-step classical RK4.  Immutable after construction; all trajectory
// computations are pure per point.
class FlowSystem {
  public:
    enum class Kind { discrete_map, ode_flow };

    using Field = std::function<Vec2(const Vec2&, double)>;
    using FieldJacobian = std::function<Mat2(const Vec2&, double)>;
    using Map = std::function<Vec2(const Vec2&)>;

    // --- factories -------------------------------------------------------
    // Chirikov-Taylor standard map T(x,y) = (x+y+a sin x, y+a sin x) mod 2pi,
    // iterated `iterates` times per forward application.
    static FlowSystem standard_map(double a, int iterates = 1);
    // Nonautonomous perturbed cylinder flow (fixed constants c=0.5, nu=0.25,
    // eps_forcing=0.25) on [0,2pi) x [0,pi].
    static FlowSystem cylinder_flow(double t0 = 0.0, double tf = 40.0,
                                    int rk4_steps = 400);
    // Zero vector field over [0,1]; Phi = id exactly.
    static FlowSystem identity(Domain domain);
    // General ODE flow from a user-specified field.  The Jacobian of the
    // field is optional; when absent it is approximated by central finite
    // differences where needed (Cauchy-Green computations).
    static FlowSystem from_field(Domain domain, std::string name, Field field,
                                 FieldJacobian jacobian, double t0, double tf,
                                 int rk4_steps);
    static FlowSystem from_map(Domain domain, std::string name, Map forward,
                               Map backward, int iterates = 1);

    // --- basic accessors -------------------------------------------------
    Kind kind() const { return kind_; }
    const Domain& domain() const { return domain_; }
    const std::string& name() const { return name_; }
    double t0() const { return t0_; }
    double tf() const { return tf_; }
    int rk4_steps() const { return rk4_steps_; }
    int iterates() const { return iterates_; }
    bool has_backward() const;
    const Field& vector_field() const { return field_; }

    // --- flow maps --------------------------------------------------------
    // Full-window maps Phi(x, t0, tf) and Phi(x, tf, t0).
    Vec2 forward(const Vec2& x) const;
    Vec2 backward(const Vec2& x) const;
    // Partial-window maps Phi(x, t0, t) and Phi(x, t, t0).  For ODE flows t
    // is a real time in [t0, tf] and the RK4 step count scales linearly with
    // the interval length; for discrete maps t is an iterate count.
    Vec2 forward_to(const Vec2& x, double t) const;
    Vec2 backward_from(const Vec2& x, double t) const;

    // Comparison times t_1 < ... < t_m = tf at which transfer operators are
    // formed (evenly spaced for ODE flows; iterate indices for maps).
    std::vector<double> comparison_times(int count) const;

    // --- variational quantities -------------------------------------------
    // C_{x,t0,t_end}^{-1} = B B^T via backward integration of the augmented
    // (state, Jacobian) system from z = Phi(x, t0, t_end).
    CauchyGreenInverse cauchy_green_inverse(const Vec2& x, double t_end) const;
    CauchyGreenInverse cauchy_green_inverse(const Vec2& x) const;

    // --- evaluation counters (diagnostics) ---------------------------------
    long forward_evaluations() const { return counters_->forward.load(); }
    long backward_evaluations() const { return counters_->backward.load(); }
    void reset_evaluation_counters() const;

  private:
    struct Counters {
        std::atomic<long> forward{0};
        std::atomic<long> backward{0};
    };

    FlowSystem() = default;

    Vec2 integrate(Vec2 x, double t_start, double t_end, int steps) const;
    int steps_for_interval(double t_start, double t_end) const;
    Mat2 jacobian_at(const Vec2& x, double t) const;

    Kind kind_ = Kind::ode_flow;
    Domain domain_ = Domain::torus();
    std::string name_;

    Field field_;
    FieldJacobian field_jacobian_;
    double t0_ = 0.0;
    double tf_ = 1.0;
    int rk4_steps_ = 400;

    Map map_forward_;
    Map map_backward_;
    int iterates_ = 1;

    std::shared_ptr<Counters> counters_ = std::make_shared<Counters>();

    friend Vec2 rk4_flow(const FlowSystem&, const Vec2&, double, double, int);
};

// Single application of the standard map / its exact algebraic inverse.
Vec2 std_map_forward(double a, const Vec2& p);
Vec2 std_map_backward(double a, const Vec2& p);

// Fixed-step classical RK4 approximation of Phi(x, t_start, t_end) for an
// ODE-flow system; t_end < t_start integrates backward.  Periodic coordinates
// are wrapped after every step; a non-finite state raises std::runtime_error.
Vec2 rk4_flow(const FlowSystem& system, const Vec2& x, double t_start,
              double t_end, int steps);

}  // namespace dynlap
