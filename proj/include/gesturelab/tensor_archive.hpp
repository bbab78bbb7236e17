#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gesturelab/tensor.hpp"

namespace gesturelab {

/// Named-tensor container: a JSON table of contents followed by raw float32
/// little-endian payload. Used for backbone checkpoints and model weights.
class TensorArchive {
public:
    void put(const std::string& name, Tensor t);
    void put_meta(const std::string& key, const std::string& value);

    bool contains(const std::string& name) const;
    const Tensor& get(const std::string& name) const;
    std::string meta(const std::string& key) const;
    bool has_meta(const std::string& key) const;

    /// Names in insertion order.
    const std::vector<std::string>& names() const { return order_; }

    void save(const std::filesystem::path& file) const;
    static TensorArchive load(const std::filesystem::path& file);

    /// Serialized byte size, without touching the filesystem.
    std::size_t serialized_size() const;

private:
    std::vector<std::string> order_;
    std::map<std::string, Tensor> tensors_;
    std::map<std::string, std::string> meta_;
};

}  // namespace gesturelab
