#pragma once

#include <iosfwd>
#include <string>

#include "hgnn/data.hpp"
#include "hgnn/model.hpp"

namespace hgnn {

/// Everything needed to score new samples without the training data.
struct Checkpoint {
    HgnnModel model;
    StandardizeStats stats;
    EmbeddingSet embeddings;
};

/// Plain-text format: header, one JSON config line, then named sections of
/// %.17g values. Saving a loaded checkpoint reproduces the file byte for byte.
void save_checkpoint(std::ostream& out, const Checkpoint& ckpt);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);

/// ParseError on a malformed or truncated file, or one whose section shapes
/// disagree with its config.
Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace hgnn
