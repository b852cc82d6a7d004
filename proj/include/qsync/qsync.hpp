// qsync.hpp — umbrella header

#pragma once

#include "config.hpp"
#include "correlations.hpp"
#include "dynamics.hpp"
#include "experiments.hpp"
#include "gaussian.hpp"
#include "optomech.hpp"
#include "sync_measures.hpp"
