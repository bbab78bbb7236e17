#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace gesturelab {

/// Incremental SHA-256 (FIPS 180-4). Used to fingerprint parameter blocks so
/// tests can assert the frozen backbone is bit-identical across training.
class Sha256 {
public:
    Sha256() { reset(); }

    void reset();
    void update(const void* bytes, std::size_t len);
    /// Finalizes and returns the lowercase hex digest. The object must be
    /// reset() before further use.
    std::string hex_digest();

    static std::string hash_hex(const void* bytes, std::size_t len) {
        Sha256 h;
        h.update(bytes, len);
        return h.hex_digest();
    }

private:
    void process_block(const std::uint8_t* block);

    std::uint32_t state_[8];
    std::uint64_t total_len_ = 0;
    std::uint8_t buffer_[64];
    std::size_t buffer_len_ = 0;
};

}  // namespace gesturelab
