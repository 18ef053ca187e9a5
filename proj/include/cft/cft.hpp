#pragma once

#include "cft/displaced_fock.hpp"
#include "cft/experiment.hpp"
#include "cft/grids.hpp"
#include "cft/io.hpp"
#include "cft/levmar.hpp"
#include "cft/measurement.hpp"
#include "cft/model_fit.hpp"
#include "cft/phase_space.hpp"
#include "cft/recon.hpp"
#include "cft/rng.hpp"
#include "cft/states.hpp"
