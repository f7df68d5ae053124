#ifndef SPINFCS_SPINFCS_HPP
#define SPINFCS_SPINFCS_HPP

#include <spinfcs/cgf.hpp>
#include <spinfcs/cumulants.hpp>
#include <spinfcs/dense.hpp>
#include <spinfcs/errors.hpp>
#include <spinfcs/jet.hpp>
#include <spinfcs/model.hpp>
#include <spinfcs/parallel.hpp>
#include <spinfcs/polynomial.hpp>
#include <spinfcs/sweep.hpp>
#include <spinfcs/trajectory.hpp>

#endif // SPINFCS_SPINFCS_HPP
