#pragma once

#include "brel/bench.hpp"
#include "brel/bitvec.hpp"
#include "brel/brwt.hpp"
#include "brel/datagen.hpp"
#include "brel/error.hpp"
#include "brel/io.hpp"
#include "brel/k2tree.hpp"
#include "brel/random.hpp"
#include "brel/relation.hpp"
#include "brel/ricerun.hpp"
