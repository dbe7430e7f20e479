// include/lipspot/frontend.h

// Copyright 2026  The lipspot authors

// See ../../COPYING for clarification regarding multiple authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef LIPSPOT_FRONTEND_H_
#define LIPSPOT_FRONTEND_H_

#include <string>
#include <vector>

#include "lipspot/common.h"
#include "lipspot/nn/param.h"
#include "lipspot/nn/types.h"
#include "lipspot/rng.h"

namespace lipspot {
namespace frontend {

// A grayscale mouth-region clip; each frame is H x W with values in [0, 1].
struct FrameSequence {
  std::vector<nn::Mat<float>> frames;
  double frame_rate = 25.0;
};

// Per-frame visual features, one row per input frame.
struct FeatureSequence {
  nn::Mat<float> features;  // T x d_feat
  std::string source_id;
};

// Crop box in [left, top, right, bottom) pixel bounds of the raw frame,
// followed by a bilinear resize and a final square crop whose offset is
// random in training and centered at evaluation.
struct CropSpec {
  int left = 15;
  int top = 46;
  int right = 145;
  int bottom = 125;
  int resize_to = 122;
  int final_crop = 112;
  enum class Mode { kTrainRandom, kTestCenter };
  Mode mode = Mode::kTestCenter;
};

// Crops by the box, resizes to resize_to x resize_to (bilinear, half-pixel
// sample centers), then takes the final_crop square.  The random offset is
// drawn uniformly from the 10 x 10 offset grid; rng may be null in
// test-center mode.
FrameSequence Preprocess(const FrameSequence& raw, const CropSpec& spec,
                         Rng* rng);

struct ResNetConfig {
  int d_feat = 256;
  int base_channels = 64;   // widths double per stage: b, 2b, 4b, 8b
  int temporal_kernel = 5;  // receptive field +-2 frames at stride 1
  // Bypasses the 2-D residual stages, connecting the pooled spatiotemporal
  // stem directly to the output layer; used to probe stem locality.
  bool trunk_identity = false;
};

// 18-layer spatiotemporal residual network, inference only.  The first
// convolution, batch normalization, and max pooling are 3-D with temporal
// stride 1 and replicated temporal edge padding, so each output row covers
// frames t-2..t+2 and the row count equals the frame count.  The residual
// trunk is the pre-activation (identity-mapping) layout, four stages of two
// blocks; the terminal spatial pooling is replaced with a fully connected
// layer producing d_feat values per frame.
class SpatioTemporalResNet {
 public:
  explicit SpatioTemporalResNet(const ResNetConfig& config);

  // All tensors register as non-trainable state; this network is loaded, not
  // trained, here.
  void Register(const std::string& prefix, nn::ParamRegistry<float>* reg);

  // He-style random weights, identity batch-norm statistics.
  void InitRandom(Rng* rng);

  // Frames must be final_crop-sized (112 x 112) with at least one frame.
  FeatureSequence ExtractFeatures(const FrameSequence& frames) const;

  const ResNetConfig& config() const { return config_; }

 private:
  struct Conv {
    nn::Mat<float> w;  // out_ch x (in_ch * kernel * kernel)
    int in_ch = 0, out_ch = 0, kernel = 0, stride = 0, pad = 0;
  };
  struct BatchNorm {
    nn::Mat<float> gamma, beta, mean, var;  // channel column vectors
  };
  struct Block {
    BatchNorm bn1;
    Conv conv1;
    BatchNorm bn2;
    Conv conv2;
    bool has_shortcut = false;
    Conv shortcut;  // 1x1, applied to the pre-activated input
  };

  void RunTrunk(nn::Mat<float>* map, int* h, int* w) const;

  ResNetConfig config_;
  nn::Mat<float> stem_w_;  // base_channels x (temporal_kernel * 7 * 7)
  BatchNorm stem_bn_;
  std::vector<std::vector<Block>> stages_;  // 4 stages x 2 blocks
  BatchNorm final_bn_;
  nn::Mat<float> fc_w_;  // d_feat x flattened trunk output
  nn::Mat<float> fc_b_;
};

// Feature container: 16-byte header (magic "LSPF", version, rows, cols as
// little-endian unsigned 32-bit values) followed by the row-major matrix in
// little-endian 32-bit floats.
void WriteFeatureFile(const std::string& path, const nn::Mat<float>& features);
nn::Mat<float> ReadFeatureFile(const std::string& path);

// Reads a feature file and validates it against the declared shape.
nn::Mat<float> LoadPrecomputed(const std::string& path, int expected_rows,
                               int expected_cols);

}  // namespace frontend
}  // namespace lipspot

#endif  // LIPSPOT_FRONTEND_H_
