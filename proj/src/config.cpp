// Copyright 2026 The dpmtse authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpmtse/config.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace dpmtse {

namespace {

using nlohmann::json;

void hash_bytes(std::uint64_t& h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;  // FNV-1a
    }
}

void hash_double(std::uint64_t& h, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    hash_bytes(h, buf, std::char_traits<char>::length(buf));
}

void hash_int(std::uint64_t& h, long v) { hash_bytes(h, &v, sizeof(v)); }

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& scope) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok)
            throw std::runtime_error("unknown config key '" + scope + "." + key + "'");
    }
}

}  // namespace

std::uint64_t config_hash(const RunConfig& c) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    hash_int(h, c.mel.sample_rate);
    hash_int(h, c.mel.n_mels);
    hash_int(h, c.mel.window);
    hash_int(h, c.mel.hop);
    hash_int(h, c.mel.fft_size);
    hash_double(h, c.mel.fmin);
    hash_double(h, c.mel.fmax);
    hash_double(h, c.mel.log_floor);
    hash_double(h, c.mel.norm_log_min);
    hash_double(h, c.mel.norm_log_max);
    hash_int(h, c.model.patch_frames);
    hash_int(h, c.model.bins);
    hash_int(h, c.model.hidden);
    hash_int(h, c.model.emb_dim);
    hash_int(h, c.model.num_categories);
    for (const std::string&cat : c.corpus.gen.categories)
        hash_bytes(h, cat.data(), cat.size());
    return h;
}

RunConfig default_run_config() {
    RunConfig c;
    if (const char* env = std::getenv("DPM_TSE_SEED"))
        c.seed = std::strtoull(env, nullptr, 10);
    c.model.bins = c.mel.n_mels;
    c.model.num_categories = static_cast<int>(c.corpus.gen.categories.size());
    return c;
}

RunConfig load_run_config(const std::string& path) {
    RunConfig c = default_run_config();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("config parse error in " + path + ": " + e.what());
    }

    reject_unknown(j, {"seed", "schedule", "mel", "model", "train", "corpus"}, "");
    read_field(j, "seed", c.seed);
    if (j.contains("schedule")) {
        const json& s = j["schedule"];
        reject_unknown(s, {"T", "beta_start", "beta_end", "corrected", "inference_steps"},
                       "schedule");
        read_field(s, "T", c.schedule.T);
        read_field(s, "beta_start", c.schedule.beta_start);
        read_field(s, "beta_end", c.schedule.beta_end);
        read_field(s, "corrected", c.schedule.corrected);
        read_field(s, "inference_steps", c.schedule.inference_steps);
    }
    if (j.contains("mel")) {
        const json& m = j["mel"];
        reject_unknown(m,
                       {"sample_rate", "n_mels", "window", "hop", "fft_size", "fmin",
                        "fmax", "log_floor", "norm_log_min", "norm_log_max"},
                       "mel");
        read_field(m, "sample_rate", c.mel.sample_rate);
        read_field(m, "n_mels", c.mel.n_mels);
        read_field(m, "window", c.mel.window);
        read_field(m, "hop", c.mel.hop);
        read_field(m, "fft_size", c.mel.fft_size);
        read_field(m, "fmin", c.mel.fmin);
        read_field(m, "fmax", c.mel.fmax);
        read_field(m, "log_floor", c.mel.log_floor);
        read_field(m, "norm_log_min", c.mel.norm_log_min);
        read_field(m, "norm_log_max", c.mel.norm_log_max);
    }
    if (j.contains("model")) {
        const json& m = j["model"];
        reject_unknown(m, {"patch_frames", "hidden", "emb_dim"}, "model");
        read_field(m, "patch_frames", c.model.patch_frames);
        read_field(m, "hidden", c.model.hidden);
        read_field(m, "emb_dim", c.model.emb_dim);
    }
    if (j.contains("train")) {
        const json& t = j["train"];
        reject_unknown(t,
                       {"learning_rate", "weight_decay", "batch_size", "epochs",
                        "clip_frames"},
                       "train");
        read_field(t, "learning_rate", c.train.learning_rate);
        read_field(t, "weight_decay", c.train.weight_decay);
        read_field(t, "batch_size", c.train.batch_size);
        read_field(t, "epochs", c.train.epochs);
        read_field(t, "clip_frames", c.train.clip_frames);
    }
    if (j.contains("corpus")) {
        const json& k = j["corpus"];
        reject_unknown(k,
                       {"train", "valid", "test", "min_interferers", "max_interferers",
                        "allow_same_category", "snr_min_db", "snr_max_db",
                        "min_event_s", "max_event_s", "background_rms", "categories"},
                       "corpus");
        read_field(k, "train", c.corpus.train);
        read_field(k, "valid", c.corpus.valid);
        read_field(k, "test", c.corpus.test);
        read_field(k, "min_interferers", c.corpus.gen.min_interferers);
        read_field(k, "max_interferers", c.corpus.gen.max_interferers);
        read_field(k, "allow_same_category", c.corpus.gen.allow_same_category);
        read_field(k, "snr_min_db", c.corpus.gen.snr_min_db);
        read_field(k, "snr_max_db", c.corpus.gen.snr_max_db);
        read_field(k, "min_event_s", c.corpus.gen.min_event_s);
        read_field(k, "max_event_s", c.corpus.gen.max_event_s);
        read_field(k, "background_rms", c.corpus.gen.background_rms);
        read_field(k, "categories", c.corpus.gen.categories);
    }

    c.corpus.gen.sample_rate = c.mel.sample_rate;
    c.model.bins = c.mel.n_mels;
    c.model.num_categories = static_cast<int>(c.corpus.gen.categories.size());
    return c;
}

void apply_paper_scale(RunConfig& c) {
    c.corpus.train = 47356;
    c.corpus.valid = 16000;
    c.corpus.test = 16000;
    c.train.epochs = 150;
    c.train.batch_size = 24;
}

}  // namespace dpmtse
