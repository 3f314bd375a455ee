// Copyright 2026 The RadarNAS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header.

#pragma once

#include "radarnas/association_roi.hpp"
#include "radarnas/common.hpp"
#include "radarnas/dataset_io.hpp"
#include "radarnas/eval_metrics.hpp"
#include "radarnas/experiment.hpp"
#include "radarnas/fft.hpp"
#include "radarnas/genome.hpp"
#include "radarnas/model_zoo.hpp"
#include "radarnas/nas_engine.hpp"
#include "radarnas/nn_io.hpp"
#include "radarnas/nn_train.hpp"
#include "radarnas/signal_sim.hpp"
#include "radarnas/spectra_dsp.hpp"
#include "radarnas/tensor_nn.hpp"
