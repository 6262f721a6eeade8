#pragma once

// Unambiguous discrimination of mixed quantum states: optimal failure
// bounds with attainability certificates, composed program/data-register
// instances, lifted measurements, constructive discriminators, and Monte
// Carlo validation. Header-only; everything lives in namespace uqsd.

#include "uqsd/compose.hpp"
#include "uqsd/discrimination.hpp"
#include "uqsd/matrix.hpp"
#include "uqsd/povm.hpp"
#include "uqsd/states.hpp"
#include "uqsd/sweep.hpp"
#include "uqsd/verify.hpp"
