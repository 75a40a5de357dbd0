#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cospace/feature_space.hpp"

namespace cospace {

/// Source of successive embeddings of the same sample set, one per model
/// update. Stands in for whatever produced the embeddings (typically a model
/// fine-tuning step between snapshots); the mining loop only consumes the
/// sequence.
class FeatureProvider {
public:
    virtual ~FeatureProvider() = default;

    // Next feature space, or nullopt when exhausted.
    virtual std::optional<FeatureSpace> next() = 0;
};

/// Reads a manifest file listing one feature-file path per line (relative
/// paths resolved against the manifest's directory); yields the files in
/// order. Blank lines and lines starting with '#' are skipped.
class FileSequenceProvider : public FeatureProvider {
public:
    explicit FileSequenceProvider(const std::string& manifest_path);

    std::optional<FeatureSpace> next() override;

    const std::vector<std::string>& paths() const { return paths_; }

private:
    std::vector<std::string> paths_;
    std::size_t cursor_ = 0;
};

/// Yields a pre-built sequence of spaces; shared so two mining runs can
/// consume byte-identical data.
class MemorySequenceProvider : public FeatureProvider {
public:
    explicit MemorySequenceProvider(std::shared_ptr<const std::vector<FeatureSpace>> spaces)
        : spaces_(std::move(spaces)) {}

    std::optional<FeatureSpace> next() override {
        if (!spaces_ || cursor_ >= spaces_->size()) return std::nullopt;
        return (*spaces_)[cursor_++];
    }

private:
    std::shared_ptr<const std::vector<FeatureSpace>> spaces_;
    std::size_t cursor_ = 0;
};

}  // namespace cospace
