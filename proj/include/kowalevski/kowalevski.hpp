#pragma once

#include "kowalevski/complex_chart.hpp"
#include "kowalevski/coordinate_nets.hpp"
#include "kowalevski/critical_set.hpp"
#include "kowalevski/errors.hpp"
#include "kowalevski/integrator.hpp"
#include "kowalevski/rigid_core.hpp"
#include "kowalevski/separated_flow.hpp"
#include "kowalevski/sov_n.hpp"
#include "kowalevski/sov_o.hpp"
