#pragma once

/// @file opa.hpp
/// Umbrella header for the opa library.

#include "opa/error.hpp"
#include "opa/weights.hpp"
#include "opa/poly.hpp"
#include "opa/space.hpp"
#include "opa/result.hpp"
#include "opa/hilbert.hpp"
#include "opa/convex.hpp"
#include "opa/structural.hpp"
#include "opa/flat.hpp"
#include "opa/closed_form.hpp"
#include "opa/composite.hpp"
#include "opa/rates.hpp"
