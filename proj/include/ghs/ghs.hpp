#pragma once

#include "ghs/error.hpp"
#include "ghs/rng.hpp"
#include "ghs/bytes.hpp"

#include "ghs/nn/tensor.hpp"
#include "ghs/nn/kernels.hpp"
#include "ghs/nn/conv.hpp"
#include "ghs/nn/dense.hpp"
#include "ghs/nn/batch_norm.hpp"
#include "ghs/nn/dropout.hpp"
#include "ghs/nn/loss.hpp"
#include "ghs/nn/adam.hpp"
#include "ghs/nn/init.hpp"
#include "ghs/nn/grad_check.hpp"

#include "ghs/model/architecture.hpp"
#include "ghs/model/network.hpp"
#include "ghs/model/serialize.hpp"

#include "ghs/raster/grid.hpp"
#include "ghs/raster/io.hpp"
#include "ghs/raster/ops.hpp"
#include "ghs/raster/tiles.hpp"

#include "ghs/sampling/labels.hpp"
#include "ghs/sampling/samples.hpp"
#include "ghs/sampling/minibatch.hpp"

#include "ghs/eval/footprints.hpp"
#include "ghs/eval/metrics.hpp"
#include "ghs/eval/report.hpp"

#include "ghs/synth/scene.hpp"

#include "ghs/pipeline/zone.hpp"
#include "ghs/pipeline/predict.hpp"
#include "ghs/pipeline/train.hpp"
#include "ghs/pipeline/transfer.hpp"
#include "ghs/pipeline/dataset.hpp"
