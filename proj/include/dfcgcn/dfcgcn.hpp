#pragma once

#include "dfcgcn/cohort.hpp"
#include "dfcgcn/common.hpp"
#include "dfcgcn/csv.hpp"
#include "dfcgcn/dfc.hpp"
#include "dfcgcn/featsel.hpp"
#include "dfcgcn/gcn.hpp"
#include "dfcgcn/metrics.hpp"
#include "dfcgcn/pipeline.hpp"
#include "dfcgcn/popgraph.hpp"
#include "dfcgcn/runner.hpp"
#include "dfcgcn/stats.hpp"
#include "dfcgcn/synth.hpp"
