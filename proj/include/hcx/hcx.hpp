#pragma once

#include "hcx/cache.hpp"
#include "hcx/common.hpp"
#include "hcx/config.hpp"
#include "hcx/csv.hpp"
#include "hcx/elasticity.hpp"
#include "hcx/expansion.hpp"
#include "hcx/fem.hpp"
#include "hcx/geometry.hpp"
#include "hcx/localized.hpp"
#include "hcx/mesh.hpp"
#include "hcx/mesh_generate.hpp"
#include "hcx/mesh_io.hpp"
#include "hcx/oned.hpp"
#include "hcx/solve.hpp"
