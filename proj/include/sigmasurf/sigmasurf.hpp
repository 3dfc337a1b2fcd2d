#pragma once

#include "core.hpp"
#include "jet.hpp"
#include "su_algebra.hpp"
#include "jacobi.hpp"
#include "grid.hpp"
#include "projector_field.hpp"
#include "families.hpp"
#include "surface_geometry.hpp"
#include "immersion.hpp"
#include "cp1.hpp"
#include "lax.hpp"
