#pragma once

#include <accessgraph/builder.hpp>
#include <accessgraph/bvh.hpp>
#include <accessgraph/edge_costs.hpp>
#include <accessgraph/error.hpp>
#include <accessgraph/exports.hpp>
#include <accessgraph/geometry.hpp>
#include <accessgraph/graph.hpp>
#include <accessgraph/graph_io.hpp>
#include <accessgraph/heatmap.hpp>
#include <accessgraph/json_io.hpp>
#include <accessgraph/json_schema.hpp>
#include <accessgraph/mesh.hpp>
#include <accessgraph/mesh_io.hpp>
#include <accessgraph/paths.hpp>
#include <accessgraph/viewshed.hpp>
