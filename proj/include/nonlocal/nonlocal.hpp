#pragma once

#include "nonlocal/errors.hpp"
#include "nonlocal/time_kernel.hpp"
#include "nonlocal/space_kernel.hpp"
#include "nonlocal/conditions.hpp"
#include "nonlocal/mittag_leffler.hpp"
#include "nonlocal/laplace.hpp"
#include "nonlocal/relaxation.hpp"
#include "nonlocal/cauchy.hpp"
#include "nonlocal/ibvp.hpp"
#include "nonlocal/ctrw.hpp"
#include "nonlocal/csv.hpp"
