#pragma once

#include <cstdint>
#include <vector>

#include "hcod/image.hpp"
#include "hcod/nn.hpp"
#include "hcod/tensor.hpp"

namespace hcod {

// Detail-enhancement parameters. Defaults follow a 3-channel XYZ input and
// C_f = 16 feature channels.
struct FdeParams {
    int in_channels = 3;
    int channels = 16;
    int spatial_kernel = 7;

    std::vector<double> depthwise;       // in_channels x 3 x 3
    std::vector<double> depthwise_bias;  // in_channels
    Linear pointwise;                    // in_channels -> C_f

    Linear ca_reduce;  // C_f -> C_f/4, followed by ReLU
    Linear ca_expand;  // C_f/4 -> C_f, followed by sigmoid

    std::vector<double> sa_kernel;  // 2 x k x k over [avg, max]
    std::vector<double> sa_bias{0.0};

    Linear pa;  // C_f -> C_f, followed by sigmoid

    // Reduction of the modulated features to one channel. Zero at
    // initialisation, so enhancement starts as the identity on S_f.
    std::vector<double> proj;
    std::vector<double> proj_bias{0.0};

    std::vector<ParamRef> parameters();
};

FdeParams init_fde(uint64_t seed, int in_channels = 3, int channels = 16, int spatial_kernel = 7);

// All-zero parameters of the given shape (every gate becomes 0.5).
FdeParams zero_fde(int in_channels = 3, int channels = 16, int spatial_kernel = 7);

// Layout conversion between an HWC image and a 1 x C x H x W feature map.
FeatureMap image_to_features(const Image& img);
Image features_to_image(const FeatureMap& f, int batch_index = 0);

// Depthwise 3x3 (zero padding) then pointwise 1x1 to C_f channels.
FeatureMap extract_features(const Image& i_m, const FdeParams& params);

// sigmoid(W2 relu(W1 GAP(F))): B x C_f x 1 x 1.
FeatureMap channel_attention(const FeatureMap& f, const FdeParams& params);

// sigmoid(conv_kxk([mean_c F, max_c F])) with zero padding: B x 1 x H x W.
// Throws ValidationError for an even kernel size.
FeatureMap spatial_attention(const FeatureMap& f, const FdeParams& params);

// sigmoid(conv_1x1(F)): B x C_f x H x W.
FeatureMap pixel_attention(const FeatureMap& f, const FdeParams& params);

// Broadcast product CA (Bx Cx1x1) * SA (Bx1xHxW) * PA (BxCxHxW).
FeatureMap combine_attention(const FeatureMap& ca, const FeatureMap& sa, const FeatureMap& pa);

// r = sum_c proj[c] * (A .* F)[c] + proj_bias, per pixel.
Image residual_details(const FeatureMap& attention, const FeatureMap& f, const std::vector<double>& proj,
                       double proj_bias = 0.0);

// clamp(S_f + r, 0, 1).
SaliencyMap apply_residual(const SaliencyMap& s_f, const Image& residual);

// apply_residual(S_f, residual_details(A, F, proj, proj_bias)).
SaliencyMap inject_details(const SaliencyMap& s_f, const FeatureMap& attention, const FeatureMap& f,
                           const std::vector<double>& proj, double proj_bias = 0.0);

// Residual r of the full attention path for features F.
Image detail_residual(const FeatureMap& f, const FdeParams& params);

// Full enhancement S_d from S_f and the structural features F.
SaliencyMap enhance(const SaliencyMap& s_f, const FeatureMap& f, const FdeParams& params);

}  // namespace hcod
