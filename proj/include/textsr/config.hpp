#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace textsr {

struct ModelConfig {
    int image_size = 64;     // training/eval HR size (square)
    int latent_channels = 16;
    int downsample = 4;      // encoder factor f, power of two
    int base_channels = 32;
    int num_resolutions = 3;
    int cross_attn_layers = 4; // M
    int attn_heads = 1;        // single-head; kept as an explicit knob
    int attn_dim = 32;
    int text_embed_dim = 32;
    int time_embed_dim = 32;
    int agg_channels = 16; // d_a, channels of the aggregated text-attention map
    std::vector<int> decoder_channels = {48, 32, 24, 16}; // latent level + 3 decoder levels
    int lora_rank = 4;
    double lora_scale = 1.0;
    std::vector<std::string> prompt = {"a", "photo", "with", "text"};
    std::vector<std::string> vocab = {"a",     "photo",  "with",  "text",    "clean",
                                      "sharp", "high",   "quality", "image", "of",
                                      "scene", "the",    "and",   "detailed", "crisp",
                                      "letters"};

    // schedule
    int schedule_steps = 1000;
    double beta_min = 1e-4;
    double beta_max = 0.02;
    int t_fixed = 200;

    void validate() const;
};

struct LossConfig {
    double lambda1 = 5.0;  // perceptual weight in the image loss
    double lambda2 = 10.0; // gradient-domain focal weight in the image loss
    double lambda3 = 10.0; // focal weight in the segmentation loss
    double lambda4 = 1.0;  // dice weight in the segmentation loss
    double gamma = 2.0;
    double dice_smooth = 1.0;
    double focal_clamp = 1e-6;
};

struct TrainConfig {
    double learning_rate = 5e-5;
    int batch_size = 1;
    int max_steps = 2000;
    uint64_t seed = 0;
    int t_fixed = 200;
    bool use_jsd = true;
    bool use_taca = true;
    bool use_mf_loss = true;
    std::string dataset_dir;
    std::string out_dir;
    int checkpoint_interval = 1000;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double weight_decay = 0.01;

    void validate() const;
};

struct DegradeConfig {
    double blur_sigma_min = 1.0;
    double blur_sigma_max = 2.6;
    std::vector<std::string> resample_kernels = {"bicubic", "bilinear", "nearest"};
    double noise_sigma_min = 0.03;
    double noise_sigma_max = 0.10;
    int jpeg_quality_min = 25;
    int jpeg_quality_max = 70;
    int scale = 4;

    void validate() const;
};

struct SynthConfig {
    int count = 200;
    int image_size = 64;
    uint64_t root_seed = 0;
    int min_patches = 1;
    int max_patches = 3;
    double min_ratio = 12.0; // long edge pixels per glyph, quality filter
    bool no_overlap = true;
    double patch_scale_min = 0.10; // of the background short edge
    double patch_scale_max = 0.40;
    double train_fraction = 0.9;
    std::string background_dir; // optional: use PNGs from here instead of procedural
    DegradeConfig degrade;

    void validate() const;
};

struct Config {
    ModelConfig model;
    LossConfig loss;
    TrainConfig train;
    SynthConfig synth;
};

} // namespace textsr
