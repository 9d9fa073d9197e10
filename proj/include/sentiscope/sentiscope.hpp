#pragma once

#include "sentiscope/core.hpp"
#include "sentiscope/divergence.hpp"
#include "sentiscope/drift.hpp"
#include "sentiscope/ingestion.hpp"
#include "sentiscope/metrics.hpp"
#include "sentiscope/random.hpp"
#include "sentiscope/report.hpp"
#include "sentiscope/robustness.hpp"
#include "sentiscope/synthgen.hpp"
#include "sentiscope/time.hpp"
