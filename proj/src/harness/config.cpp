#include "textsr/harness/config_io.hpp"

#include <fstream>

#include "json.hpp"
#include "textsr/core/errors.hpp"

namespace textsr {

using nlohmann::json;

void ModelConfig::validate() const {
    if (image_size <= 0 || image_size % downsample != 0)
        throw ParamError("config: image_size must be positive and divisible by downsample");
    if (downsample < 1 || (downsample & (downsample - 1)) != 0)
        throw ParamError("config: downsample must be a power of two");
    if (latent_channels <= 0 || base_channels <= 0 || attn_dim <= 0 || text_embed_dim <= 0 ||
        agg_channels <= 0)
        throw ParamError("config: channel counts must be positive");
    if (num_resolutions < 1) throw ParamError("config: num_resolutions must be >= 1");
    if (cross_attn_layers < 1) throw ParamError("config: cross_attn_layers must be >= 1");
    if (time_embed_dim < 2 || time_embed_dim % 2 != 0)
        throw ParamError("config: time_embed_dim must be even");
    if (decoder_channels.size() < 2) throw ParamError("config: decoder_channels needs >= 2 entries");
    for (size_t i = 1; i < decoder_channels.size(); ++i)
        if (decoder_channels[i] % 2 != 0)
            throw ParamError("config: decoder level channels must be even");
    if (schedule_steps < 1) throw ParamError("config: schedule_steps must be >= 1");
    if (t_fixed < 0 || t_fixed >= schedule_steps)
        throw ParamError("config: t_fixed out of schedule range");
}

void TrainConfig::validate() const {
    if (max_steps < 1) throw ParamError("config: max_steps must be >= 1");
    if (batch_size != 1) throw ParamError("config: only batch_size 1 is supported");
    if (!(learning_rate > 0)) throw ParamError("config: learning_rate must be positive");
}

void DegradeConfig::validate() const {
    if (blur_sigma_min < 0 || blur_sigma_max < blur_sigma_min)
        throw ParamError("config: invalid blur sigma range");
    if (noise_sigma_min < 0 || noise_sigma_max < noise_sigma_min)
        throw ParamError("config: invalid noise sigma range");
    if (jpeg_quality_min < 1 || jpeg_quality_max > 100 || jpeg_quality_max < jpeg_quality_min)
        throw ParamError("config: invalid jpeg quality range");
    if (scale < 1) throw ParamError("config: scale must be >= 1");
    if (resample_kernels.empty()) throw ParamError("config: resample kernel set empty");
    for (const auto& k : resample_kernels)
        if (k != "bicubic" && k != "bilinear" && k != "nearest")
            throw ParamError("config: unknown resample kernel '" + k + "'");
}

void SynthConfig::validate() const {
    if (count < 1) throw ParamError("config: synth count must be >= 1");
    if (image_size < 16) throw ParamError("config: synth image_size too small");
    if (min_patches < 0 || max_patches < min_patches)
        throw ParamError("config: invalid patch count range");
    if (!(patch_scale_min > 0) || patch_scale_max < patch_scale_min || patch_scale_max > 1)
        throw ParamError("config: invalid patch scale range");
    if (!(train_fraction > 0) || !(train_fraction < 1))
        throw ParamError("config: train_fraction must be in (0,1)");
    if (min_ratio <= 0) throw ParamError("config: min_ratio must be positive");
    degrade.validate();
}

namespace {

template <typename V>
void get_to(const json& j, const char* key, V& out) {
    if (j.contains(key)) j.at(key).get_to(out);
}

json model_to_json(const ModelConfig& m) {
    return json{{"image_size", m.image_size},
                {"latent_channels", m.latent_channels},
                {"downsample", m.downsample},
                {"base_channels", m.base_channels},
                {"num_resolutions", m.num_resolutions},
                {"cross_attn_layers", m.cross_attn_layers},
                {"attn_heads", m.attn_heads},
                {"attn_dim", m.attn_dim},
                {"text_embed_dim", m.text_embed_dim},
                {"time_embed_dim", m.time_embed_dim},
                {"agg_channels", m.agg_channels},
                {"decoder_channels", m.decoder_channels},
                {"lora_rank", m.lora_rank},
                {"lora_scale", m.lora_scale},
                {"prompt", m.prompt},
                {"vocab", m.vocab},
                {"schedule_steps", m.schedule_steps},
                {"beta_min", m.beta_min},
                {"beta_max", m.beta_max},
                {"t_fixed", m.t_fixed}};
}

void model_from_json(const json& j, ModelConfig& m) {
    get_to(j, "image_size", m.image_size);
    get_to(j, "latent_channels", m.latent_channels);
    get_to(j, "downsample", m.downsample);
    get_to(j, "base_channels", m.base_channels);
    get_to(j, "num_resolutions", m.num_resolutions);
    get_to(j, "cross_attn_layers", m.cross_attn_layers);
    get_to(j, "attn_heads", m.attn_heads);
    get_to(j, "attn_dim", m.attn_dim);
    get_to(j, "text_embed_dim", m.text_embed_dim);
    get_to(j, "time_embed_dim", m.time_embed_dim);
    get_to(j, "agg_channels", m.agg_channels);
    get_to(j, "decoder_channels", m.decoder_channels);
    get_to(j, "lora_rank", m.lora_rank);
    get_to(j, "lora_scale", m.lora_scale);
    get_to(j, "prompt", m.prompt);
    get_to(j, "vocab", m.vocab);
    get_to(j, "schedule_steps", m.schedule_steps);
    get_to(j, "beta_min", m.beta_min);
    get_to(j, "beta_max", m.beta_max);
    get_to(j, "t_fixed", m.t_fixed);
}

json loss_to_json(const LossConfig& l) {
    return json{{"lambda1", l.lambda1},     {"lambda2", l.lambda2},
                {"lambda3", l.lambda3},     {"lambda4", l.lambda4},
                {"gamma", l.gamma},         {"dice_smooth", l.dice_smooth},
                {"focal_clamp", l.focal_clamp}};
}

void loss_from_json(const json& j, LossConfig& l) {
    get_to(j, "lambda1", l.lambda1);
    get_to(j, "lambda2", l.lambda2);
    get_to(j, "lambda3", l.lambda3);
    get_to(j, "lambda4", l.lambda4);
    get_to(j, "gamma", l.gamma);
    get_to(j, "dice_smooth", l.dice_smooth);
    get_to(j, "focal_clamp", l.focal_clamp);
}

json train_to_json(const TrainConfig& t) {
    return json{{"learning_rate", t.learning_rate},
                {"batch_size", t.batch_size},
                {"max_steps", t.max_steps},
                {"seed", t.seed},
                {"t_fixed", t.t_fixed},
                {"use_jsd", t.use_jsd},
                {"use_taca", t.use_taca},
                {"use_mf_loss", t.use_mf_loss},
                {"dataset_dir", t.dataset_dir},
                {"out_dir", t.out_dir},
                {"checkpoint_interval", t.checkpoint_interval},
                {"adam_beta1", t.adam_beta1},
                {"adam_beta2", t.adam_beta2},
                {"weight_decay", t.weight_decay}};
}

void train_from_json(const json& j, TrainConfig& t) {
    get_to(j, "learning_rate", t.learning_rate);
    get_to(j, "batch_size", t.batch_size);
    get_to(j, "max_steps", t.max_steps);
    get_to(j, "seed", t.seed);
    get_to(j, "t_fixed", t.t_fixed);
    get_to(j, "use_jsd", t.use_jsd);
    get_to(j, "use_taca", t.use_taca);
    get_to(j, "use_mf_loss", t.use_mf_loss);
    get_to(j, "dataset_dir", t.dataset_dir);
    get_to(j, "out_dir", t.out_dir);
    get_to(j, "checkpoint_interval", t.checkpoint_interval);
    get_to(j, "adam_beta1", t.adam_beta1);
    get_to(j, "adam_beta2", t.adam_beta2);
    get_to(j, "weight_decay", t.weight_decay);
}

json degrade_to_json(const DegradeConfig& d) {
    return json{{"blur_sigma_min", d.blur_sigma_min},
                {"blur_sigma_max", d.blur_sigma_max},
                {"resample_kernels", d.resample_kernels},
                {"noise_sigma_min", d.noise_sigma_min},
                {"noise_sigma_max", d.noise_sigma_max},
                {"jpeg_quality_min", d.jpeg_quality_min},
                {"jpeg_quality_max", d.jpeg_quality_max},
                {"scale", d.scale}};
}

void degrade_from_json(const json& j, DegradeConfig& d) {
    get_to(j, "blur_sigma_min", d.blur_sigma_min);
    get_to(j, "blur_sigma_max", d.blur_sigma_max);
    get_to(j, "resample_kernels", d.resample_kernels);
    get_to(j, "noise_sigma_min", d.noise_sigma_min);
    get_to(j, "noise_sigma_max", d.noise_sigma_max);
    get_to(j, "jpeg_quality_min", d.jpeg_quality_min);
    get_to(j, "jpeg_quality_max", d.jpeg_quality_max);
    get_to(j, "scale", d.scale);
}

json synth_to_json(const SynthConfig& s) {
    return json{{"count", s.count},
                {"image_size", s.image_size},
                {"root_seed", s.root_seed},
                {"min_patches", s.min_patches},
                {"max_patches", s.max_patches},
                {"min_ratio", s.min_ratio},
                {"no_overlap", s.no_overlap},
                {"patch_scale_min", s.patch_scale_min},
                {"patch_scale_max", s.patch_scale_max},
                {"train_fraction", s.train_fraction},
                {"background_dir", s.background_dir},
                {"degrade", degrade_to_json(s.degrade)}};
}

void synth_from_json(const json& j, SynthConfig& s) {
    get_to(j, "count", s.count);
    get_to(j, "image_size", s.image_size);
    get_to(j, "root_seed", s.root_seed);
    get_to(j, "min_patches", s.min_patches);
    get_to(j, "max_patches", s.max_patches);
    get_to(j, "min_ratio", s.min_ratio);
    get_to(j, "no_overlap", s.no_overlap);
    get_to(j, "patch_scale_min", s.patch_scale_min);
    get_to(j, "patch_scale_max", s.patch_scale_max);
    get_to(j, "train_fraction", s.train_fraction);
    get_to(j, "background_dir", s.background_dir);
    if (j.contains("degrade")) degrade_from_json(j.at("degrade"), s.degrade);
}

} // namespace

std::string config_to_json(const Config& c) {
    json j{{"model", model_to_json(c.model)},
           {"loss", loss_to_json(c.loss)},
           {"train", train_to_json(c.train)},
           {"synth", synth_to_json(c.synth)}};
    return j.dump(2);
}

Config config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParamError(std::string("config: invalid JSON: ") + e.what());
    }
    Config c;
    if (j.contains("model")) model_from_json(j.at("model"), c.model);
    if (j.contains("loss")) loss_from_json(j.at("loss"), c.loss);
    if (j.contains("train")) train_from_json(j.at("train"), c.train);
    if (j.contains("synth")) synth_from_json(j.at("synth"), c.synth);
    return c;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return config_from_json(text);
}

void save_config(const std::string& path, const Config& c) {
    std::ofstream out(path);
    if (!out) throw IoError("config: cannot write " + path);
    out << config_to_json(c) << "\n";
}

uint64_t config_hash(const Config& c) {
    // FNV-1a over the canonical dump
    std::string s = config_to_json(c);
    uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace textsr
