#pragma once

#include "error.hpp"
#include "ingest.hpp"
#include "labeling.hpp"
#include "dataset.hpp"
#include "svm.hpp"
#include "eval.hpp"
#include "modelselect.hpp"
#include "parallel.hpp"
#include "runner.hpp"
