#ifndef TVOA_TVOA_HPP
#define TVOA_TVOA_HPP

#include "tvoa/mesh.hpp"
#include "tvoa/fields.hpp"
#include "tvoa/fem.hpp"
#include "tvoa/elasticity.hpp"
#include "tvoa/sparse_linalg.hpp"
#include "tvoa/forms.hpp"
#include "tvoa/tv_oracle.hpp"
#include "tvoa/master_problem.hpp"
#include "tvoa/instances.hpp"
#include "tvoa/driver.hpp"
#include "tvoa/report_io.hpp"

#endif  // TVOA_TVOA_HPP
