#pragma once

#include "cbandits/agents.hpp"
#include "cbandits/covering.hpp"
#include "cbandits/errors.hpp"
#include "cbandits/estimation.hpp"
#include "cbandits/experiment.hpp"
#include "cbandits/factor.hpp"
#include "cbandits/graph.hpp"
#include "cbandits/intervention.hpp"
#include "cbandits/model.hpp"
#include "cbandits/model_io.hpp"
#include "cbandits/or_tree.hpp"
#include "cbandits/random.hpp"
#include "cbandits/stats.hpp"
