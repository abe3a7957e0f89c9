#pragma once

#include "adslab/ads_core.hpp"
#include "adslab/barycentric_extension.hpp"
#include "adslab/circle_map.hpp"
#include "adslab/convex_hull.hpp"
#include "adslab/curvature_field.hpp"
#include "adslab/errors.hpp"
#include "adslab/expression.hpp"
#include "adslab/fuchsian.hpp"
#include "adslab/gluing.hpp"
#include "adslab/hyperbolic_plane.hpp"
#include "adslab/liouville.hpp"
#include "adslab/numeric_policy.hpp"
#include "adslab/parallel.hpp"
#include "adslab/projective_line.hpp"
#include "adslab/quasicircle.hpp"
#include "adslab/quasisymmetry.hpp"
#include "adslab/report.hpp"
#include "adslab/surface.hpp"
