#pragma once

#include "flmgof/errors.hpp"
#include "flmgof/parallel.hpp"
#include "flmgof/rng.hpp"
#include "flmgof/functional.hpp"
#include "flmgof/basis.hpp"
#include "flmgof/selection.hpp"
#include "flmgof/flm.hpp"
#include "flmgof/pcvm.hpp"
#include "flmgof/bootstrap.hpp"
#include "flmgof/competing.hpp"
#include "flmgof/pipeline.hpp"
#include "flmgof/simulation.hpp"
#include "flmgof/io.hpp"
