#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "fgpl/dataset.hpp"
#include "fgpl/text_io.hpp"

namespace fgpl::testing {

/// Fresh scratch directory under the current working directory.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::current_path() / "scratch" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string text_of(const std::filesystem::path& path) { return text::read_file(path); }

/// A few-second corpus: 6 classes, one planted pair.
inline GeneratorSpec small_spec(std::uint64_t seed = 7) {
    GeneratorSpec spec;
    spec.num_classes = 6;
    spec.num_objects = 5;
    spec.feature_dim = 4;
    spec.num_scenes = 40;
    spec.scene_size = 10;
    spec.zipf_exponent = 1.0;
    spec.mean_scale = 4.0;
    spec.confusable_pairs = {{4, 1, 0.9}};
    spec.seed = seed;
    return spec;
}

}  // namespace fgpl::testing
