#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ebs {

using cplx = std::complex<double>;
using RealVec = std::vector<double>;
using CplxVec = std::vector<cplx>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx I1{0.0, 1.0};

// Every library failure carries a short machine-readable code.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

// Bad input: wrong domain, violated precondition, malformed config.
class InputError : public Error {
public:
    using Error::Error;
};

// The numerics could not deliver: integrator stalls, loss of definiteness, etc.
class NumericalError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public NumericalError {
public:
    IntegrationError(double x, const std::string& what)
        : NumericalError("integration_failure", what), x_(x) {}
    double where() const { return x_; }

private:
    double x_;
};

// Worker count for parallel loops, from DARBOUX_THREADS (default: hardware).
unsigned worker_count();

// Runs fn(i) for i in [0, n) over worker_count() threads.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn);

}  // namespace ebs

#include "ebs/parallel_impl.hpp"
