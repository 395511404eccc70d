#pragma once

#include "minergraph/address.hpp"
#include "minergraph/concentration.hpp"
#include "minergraph/control.hpp"
#include "minergraph/csv.hpp"
#include "minergraph/digraph.hpp"
#include "minergraph/error.hpp"
#include "minergraph/export.hpp"
#include "minergraph/ingest.hpp"
#include "minergraph/netbuild.hpp"
#include "minergraph/numeric.hpp"
#include "minergraph/pipeline.hpp"
#include "minergraph/synth.hpp"
#include "minergraph/topology.hpp"
