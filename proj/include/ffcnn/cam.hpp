#pragma once

#include <string>
#include <vector>

#include "ffcnn/inference.hpp"

namespace ffcnn {

// Signed per-pixel contribution of one class logit. Positive values mark
// regions the classifier counts as evidence for the class, negative against.
struct CamMap {
    Tensor values;  // [H,W]
    int target_class = 0;
    std::vector<int> layers;  // contributing layers, 1-based
};

// cam[y,x] = sum_ch head.weights[class, feature(layer,ch,y,x)] * normalized_activation
// layer_index is 1-based; layer 1 is rejected (the classifier never sees it).
CamMap layer_cam(const FfNetwork& net, const ClassifierHead& head, const Tensor& image, int target_class,
                 int layer_index);

// elementwise sum of same-shape layer maps
CamMap combined_cam(const std::vector<CamMap>& maps);

// Diverging color render: negative -> pink, zero -> white, positive ->
// yellow, scale symmetric at max |cam|. image_alpha > 0 blends the grayscale
// input underneath; maps not matching the image extent are bilinearly
// resized for rendering only.
void render_cam(const CamMap& cam, const Tensor* image, const std::string& path, float image_alpha = 0.0f);

void write_cam_csv(const std::string& path, const CamMap& cam);

}  // namespace ffcnn
