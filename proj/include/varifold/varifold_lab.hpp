#pragma once

#include "varifold/errors.hpp"
#include "varifold/geometry.hpp"
#include "varifold/varifold.hpp"
#include "varifold/conic.hpp"
#include "varifold/variation.hpp"
#include "varifold/projection.hpp"
#include "varifold/surgery.hpp"
#include "varifold/tomography.hpp"
#include "varifold/blowup.hpp"

namespace varifold {
inline constexpr const char* kVersion = "0.1.0";
}
