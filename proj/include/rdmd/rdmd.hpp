#ifndef RDMD_RDMD_HPP
#define RDMD_RDMD_HPP

#include "rdmd/error.hpp"
#include "rdmd/types.hpp"
#include "rdmd/rng.hpp"
#include "rdmd/snapshot.hpp"
#include "rdmd/linalg.hpp"
#include "rdmd/randproj.hpp"
#include "rdmd/dmd.hpp"
#include "rdmd/erranalysis.hpp"
#include "rdmd/synth.hpp"

#endif
