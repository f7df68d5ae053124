#ifndef SPINFCS_ERRORS_HPP
#define SPINFCS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace spinfcs {

/// Base of every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParams : public Error {
public:
    using Error::Error;
};

/// delta_esr == 0 and Gamma_L_down + Gamma_R_down == 0: the spin-flip rate z is undefined.
class DegenerateDenominator : public Error {
public:
    using Error::Error;
};

/// The 2x2 block acting on (Re rho_ud, Im rho_ud) cannot be inverted.
class SingularCoherenceBlock : public Error {
public:
    using Error::Error;
};

class NoNullVector : public Error {
public:
    using Error::Error;
};

/// Two roots came within tolerance of the tracked CGF branch.
class BranchCrossing : public Error {
public:
    using Error::Error;
};

/// dp/dlambda vanishes at the tracked root.
class DegenerateBranch : public Error {
public:
    using Error::Error;
};

class MethodsDisagree : public Error {
public:
    using Error::Error;
};

class UnequalCouplings : public Error {
public:
    using Error::Error;
};

class InsufficientSamples : public Error {
public:
    using Error::Error;
};

class WrongRegime : public Error {
public:
    using Error::Error;
};

} // namespace spinfcs

#endif // SPINFCS_ERRORS_HPP
