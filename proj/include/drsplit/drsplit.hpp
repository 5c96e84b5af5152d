#pragma once

#include "drsplit/core.hpp"
#include "drsplit/prox.hpp"
#include "drsplit/displacement.hpp"
#include "drsplit/engine.hpp"
#include "drsplit/oracles.hpp"
#include "drsplit/scenario.hpp"
