#ifndef VMORPH_VMORPH_HPP
#define VMORPH_VMORPH_HPP

#include "vmorph/assessment.hpp"
#include "vmorph/decimation.hpp"
#include "vmorph/error.hpp"
#include "vmorph/graph.hpp"
#include "vmorph/height_grid.hpp"
#include "vmorph/json_io.hpp"
#include "vmorph/isolation.hpp"
#include "vmorph/kdtree.hpp"
#include "vmorph/mesh.hpp"
#include "vmorph/mesh_io.hpp"
#include "vmorph/morphology.hpp"
#include "vmorph/orientation.hpp"
#include "vmorph/powell.hpp"
#include "vmorph/registration.hpp"
#include "vmorph/slicing.hpp"
#include "vmorph/spline.hpp"
#include "vmorph/symmetry.hpp"
#include "vmorph/synthetic.hpp"
#include "vmorph/transform.hpp"

#endif  // VMORPH_VMORPH_HPP
