#pragma once

#include "warmstart/dataset.hpp"
#include "warmstart/error.hpp"
#include "warmstart/eval.hpp"
#include "warmstart/gnn.hpp"
#include "warmstart/graph.hpp"
#include "warmstart/maxcut.hpp"
#include "warmstart/parallel.hpp"
#include "warmstart/qaoa.hpp"
#include "warmstart/random.hpp"
#include "warmstart/tensor.hpp"
