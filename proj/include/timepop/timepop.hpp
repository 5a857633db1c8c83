#pragma once

#include "timepop/core.hpp"
#include "timepop/decay.hpp"
#include "timepop/evaluation.hpp"
#include "timepop/ingestion.hpp"
#include "timepop/parallel.hpp"
#include "timepop/precursors.hpp"
#include "timepop/recommender.hpp"
#include "timepop/splitter.hpp"
#include "timepop/synthetic.hpp"
