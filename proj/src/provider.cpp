#include "cospace/provider.hpp"

#include <filesystem>
#include <fstream>

#include "cospace/dataset.hpp"

namespace cospace {

FileSequenceProvider::FileSequenceProvider(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw ConfigError("cannot open feature manifest '" + manifest_path + "'");
    const std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::filesystem::path p(line);
        if (p.is_relative()) p = base / p;
        paths_.push_back(p.string());
    }
}

std::optional<FeatureSpace> FileSequenceProvider::next() {
    if (cursor_ >= paths_.size()) return std::nullopt;
    return load_features(paths_[cursor_++]);
}

}  // namespace cospace
