#include "gesturelab/tensor_archive.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace gesturelab {

namespace {
constexpr char kMagic[4] = {'G', 'L', 'W', 'T'};
constexpr std::uint32_t kVersion = 1;

[[noreturn]] void archive_error(const std::filesystem::path& file, const std::string& what) {
    throw std::runtime_error("weights archive '" + file.string() + "': " + what);
}

nlohmann::ordered_json build_header(const std::vector<std::string>& order,
                                    const std::map<std::string, Tensor>& tensors,
                                    const std::map<std::string, std::string>& meta) {
    nlohmann::ordered_json header;
    header["tensors"] = nlohmann::ordered_json::array();
    std::uint64_t offset = 0;
    for (const auto& name : order) {
        const Tensor& t = tensors.at(name);
        nlohmann::ordered_json entry;
        entry["name"] = name;
        entry["shape"] = t.shape;
        entry["offset"] = offset;
        header["tensors"].push_back(entry);
        offset += static_cast<std::uint64_t>(t.size()) * sizeof(float);
    }
    header["meta"] = meta;
    return header;
}
}  // namespace

void TensorArchive::put(const std::string& name, Tensor t) {
    if (!tensors_.count(name)) order_.push_back(name);
    tensors_[name] = std::move(t);
}

void TensorArchive::put_meta(const std::string& key, const std::string& value) { meta_[key] = value; }

bool TensorArchive::contains(const std::string& name) const { return tensors_.count(name) != 0; }

const Tensor& TensorArchive::get(const std::string& name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw std::runtime_error("weights archive: missing tensor '" + name + "'");
    return it->second;
}

std::string TensorArchive::meta(const std::string& key) const {
    auto it = meta_.find(key);
    if (it == meta_.end()) throw std::runtime_error("weights archive: missing metadata key '" + key + "'");
    return it->second;
}

bool TensorArchive::has_meta(const std::string& key) const { return meta_.count(key) != 0; }

std::size_t TensorArchive::serialized_size() const {
    const std::string header = build_header(order_, tensors_, meta_).dump();
    std::size_t payload = 0;
    for (const auto& [name, t] : tensors_) payload += static_cast<std::size_t>(t.size()) * sizeof(float);
    return sizeof(kMagic) + sizeof(std::uint32_t) + sizeof(std::uint64_t) + header.size() + payload;
}

void TensorArchive::save(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::binary);
    if (!out) archive_error(file, "cannot open for writing");

    const std::string header = build_header(order_, tensors_, meta_).dump();
    const std::uint64_t header_len = header.size();

    out.write(kMagic, sizeof(kMagic));
    out.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
    out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (const auto& name : order_) {
        const Tensor& t = tensors_.at(name);
        out.write(reinterpret_cast<const char*>(t.data.data()),
                  static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    }
    if (!out) archive_error(file, "write failed");
}

TensorArchive TensorArchive::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) archive_error(file, "cannot open");

    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t header_len = 0;
    in.read(magic, sizeof(magic));
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) archive_error(file, "bad magic");
    if (version != kVersion) archive_error(file, "unsupported version " + std::to_string(version));
    if (header_len > (1u << 26)) archive_error(file, "corrupt header length");

    std::string header_text(header_len, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(header_len));
    if (!in) archive_error(file, "truncated header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_text);
    } catch (const nlohmann::json::exception& e) {
        archive_error(file, std::string("invalid header: ") + e.what());
    }

    TensorArchive archive;
    if (header.contains("meta")) {
        for (auto it = header["meta"].begin(); it != header["meta"].end(); ++it)
            archive.meta_[it.key()] = it.value().get<std::string>();
    }

    std::uint64_t expected_offset = 0;
    for (const auto& entry : header.at("tensors")) {
        const std::string name = entry.at("name").get<std::string>();
        const std::vector<int> shape = entry.at("shape").get<std::vector<int>>();
        const std::uint64_t offset = entry.at("offset").get<std::uint64_t>();
        if (offset != expected_offset) archive_error(file, "tensor '" + name + "' has inconsistent offset");

        Tensor t(shape);
        in.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(t.data.size() * sizeof(float)));
        if (!in) archive_error(file, "truncated payload at tensor '" + name + "'");
        expected_offset += static_cast<std::uint64_t>(t.size()) * sizeof(float);
        archive.put(name, std::move(t));
    }

    // Trailing bytes mean the file does not match its table of contents.
    in.peek();
    if (!in.eof()) archive_error(file, "trailing bytes after payload");
    return archive;
}

}  // namespace gesturelab
