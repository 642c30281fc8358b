#ifndef SYMMPC_SYMMPC_HPP_
#define SYMMPC_SYMMPC_HPP_

#include "active_set.hpp"
#include "condense.hpp"
#include "driver.hpp"
#include "enumerate.hpp"
#include "io.hpp"
#include "lp.hpp"
#include "ocp.hpp"
#include "polytope.hpp"
#include "postprocess.hpp"
#include "simplex.hpp"
#include "svg.hpp"
#include "symmetry.hpp"
#include "types.hpp"

#endif  // SYMMPC_SYMMPC_HPP_
