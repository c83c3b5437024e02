#pragma once

#include "emuprob/bits.hpp"
#include "emuprob/constructions.hpp"
#include "emuprob/emulation.hpp"
#include "emuprob/error.hpp"
#include "emuprob/markov.hpp"
#include "emuprob/probability.hpp"
#include "emuprob/rng.hpp"
#include "emuprob/scalar.hpp"
#include "emuprob/universe.hpp"
#include "emuprob/universe_io.hpp"
#include "emuprob/virus_chain.hpp"
