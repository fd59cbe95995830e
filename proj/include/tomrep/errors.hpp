// errors.hpp
// Error types shared across the library. All failures are reported as
// exceptions derived from the std hierarchy so callers can catch either
// the specific tomrep type or the std base.

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace tomrep {

// Argument outside the supported range of an algorithm (order too high,
// value would overflow, ...).
class range_error : public std::out_of_range {
public:
    explicit range_error(const std::string& msg) : std::out_of_range(msg) {}
};

// Input violates a physical-state invariant (Hermiticity, trace,
// probability-ball membership, positivity).
class invalid_state : public std::invalid_argument {
public:
    explicit invalid_state(const std::string& msg) : std::invalid_argument(msg) {}
};

// Reference frame (mu, nu) = (0, 0) or otherwise unusable.
class invalid_frame : public std::invalid_argument {
public:
    explicit invalid_frame(const std::string& msg) : std::invalid_argument(msg) {}
};

// Gaussian with Re(A) <= 0: |psi|^2 is not integrable.
class non_normalizable : public std::invalid_argument {
public:
    explicit non_normalizable(const std::string& msg) : std::invalid_argument(msg) {}
};

// Angle extraction at a degenerate direction (denominator below tolerance).
class undefined_angle : public std::domain_error {
public:
    explicit undefined_angle(const std::string& msg) : std::domain_error(msg) {}
};

// A probability produced by a representation map fell outside [0,1];
// signals unphysical input.
class representation_overflow : public std::domain_error {
public:
    explicit representation_overflow(const std::string& msg) : std::domain_error(msg) {}
};

// Quadrature failed to reach the requested tolerance. Carries the best
// estimate obtained and its error bound so callers can decide.
class accuracy_error : public std::runtime_error {
public:
    accuracy_error(const std::string& msg, std::complex<double> best, double err)
        : std::runtime_error(msg), best_estimate(best), error_estimate(err) {}
    std::complex<double> best_estimate;
    double error_estimate;
};

// ODE state became non-finite. last_finite_time is the last grid time with
// a finite state.
class divergence_error : public std::runtime_error {
public:
    divergence_error(const std::string& msg, double t_last)
        : std::runtime_error(msg), last_finite_time(t_last) {}
    double last_finite_time;
};

// Defensive guard for evaluations at a vanishing denominator (|eps| ~ 0).
class singularity_error : public std::domain_error {
public:
    explicit singularity_error(const std::string& msg) : std::domain_error(msg) {}
};

} // namespace tomrep
