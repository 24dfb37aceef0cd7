#pragma once

#include "atlasid/config.hpp"
#include "atlasid/engine.hpp"
#include "atlasid/error.hpp"
#include "atlasid/ident.hpp"
#include "atlasid/io.hpp"
#include "atlasid/model.hpp"
#include "atlasid/plot.hpp"
#include "atlasid/rng.hpp"
#include "atlasid/stats.hpp"
