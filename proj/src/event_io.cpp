#include "hyperent/event_io.hpp"

#include <openssl/evp.h>
#include <zlib.h>

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hyperent {

namespace {

// All multi-byte fields are little-endian on disk. The build targets
// little-endian hosts; fields are packed explicitly byte by byte so the
// layout never depends on struct padding.

void put_u16(std::string& buf, uint16_t v) {
    buf.push_back(static_cast<char>(v & 0xff));
    buf.push_back(static_cast<char>(v >> 8));
}
void put_u32(std::string& buf, uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& buf, uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f64(std::string& buf, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(buf, bits);
}

class Reader {
  public:
    explicit Reader(std::string data) : data_(std::move(data)) {}
    uint16_t u16() { return static_cast<uint16_t>(u8() | (u8() << 8)); }
    uint32_t u32() {
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(u8()) << (8 * i);
        return v;
    }
    uint64_t u64() {
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(u8()) << (8 * i);
        return v;
    }
    double f64() {
        uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string bytes(size_t n) {
        if (pos_ + n > data_.size()) throw std::runtime_error("truncated file");
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    size_t remaining() const { return data_.size() - pos_; }

  private:
    uint32_t u8() {
        if (pos_ >= data_.size()) throw std::runtime_error("truncated file");
        return static_cast<unsigned char>(data_[pos_++]);
    }
    std::string data_;
    size_t pos_ = 0;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

void put_header(std::string& buf, const char* magic, uint32_t count,
                const std::string& hash) {
    buf.append(magic, 8);
    put_u32(buf, kFormatVersion);
    put_u32(buf, count);
    std::string h = hash;
    h.resize(64, '0');
    buf.append(h);
}

struct Header {
    uint32_t version;
    uint32_t count;
    std::string hash;
};

Header read_header(Reader& r, const char* magic, const std::string& path) {
    if (r.bytes(8) != std::string(magic, 8))
        throw std::runtime_error("bad magic in " + path);
    Header h;
    h.version = r.u32();
    h.count = r.u32();
    h.hash = r.bytes(64);
    return h;
}

}  // namespace

void write_events(const std::string& path, const std::vector<PhotonEvent>& events,
                  const std::string& config_hash) {
    std::string buf;
    buf.reserve(80 + 16 * events.size());
    put_header(buf, kEventMagic, static_cast<uint32_t>(events.size()),
               config_hash);
    for (const auto& e : events) {
        put_u16(buf, e.x);
        put_u16(buf, e.y);
        put_u32(buf, e.tot);
        put_u64(buf, e.toa_ns);
    }
    spit(path, buf);
}

EventFile read_events(const std::string& path) {
    Reader r(slurp(path));
    Header h = read_header(r, kEventMagic, path);
    EventFile f;
    f.version = h.version;
    f.config_hash = h.hash;
    size_t n = h.count != 0 ? h.count : r.remaining() / 16;
    f.events.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        PhotonEvent e;
        e.x = r.u16();
        e.y = r.u16();
        e.tot = r.u32();
        e.toa_ns = r.u64();
        f.events.push_back(e);
    }
    return f;
}

namespace {

void put_photon(std::string& buf, const CentroidedPhoton& p) {
    put_f64(buf, p.cx);
    put_f64(buf, p.cy);
    put_u64(buf, static_cast<uint64_t>(p.toa_corr));
    put_u32(buf, static_cast<uint32_t>(p.cluster_size));
    put_u64(buf, p.total_tot);
    put_u32(buf, p.arm == Arm::signal ? 0u : 1u);
}

CentroidedPhoton get_photon(Reader& r) {
    CentroidedPhoton p;
    p.cx = r.f64();
    p.cy = r.f64();
    p.toa_corr = static_cast<int64_t>(r.u64());
    p.cluster_size = static_cast<int>(r.u32());
    p.total_tot = r.u64();
    p.arm = r.u32() == 0 ? Arm::signal : Arm::idler;
    return p;
}

}  // namespace

void write_photons(const std::string& path,
                   const std::vector<CentroidedPhoton>& photons,
                   const std::string& config_hash) {
    std::string buf;
    buf.reserve(80 + 40 * photons.size());
    put_header(buf, kPhotonMagic, static_cast<uint32_t>(photons.size()),
               config_hash);
    for (const auto& p : photons) put_photon(buf, p);
    spit(path, buf);
}

std::vector<CentroidedPhoton> read_photons(const std::string& path) {
    Reader r(slurp(path));
    Header h = read_header(r, kPhotonMagic, path);
    std::vector<CentroidedPhoton> out;
    out.reserve(h.count);
    for (uint32_t i = 0; i < h.count; ++i) out.push_back(get_photon(r));
    return out;
}

void write_pairs(const std::string& path,
                 const std::vector<CoincidencePair>& pairs,
                 const std::string& config_hash) {
    std::string buf;
    put_header(buf, kPairMagic, static_cast<uint32_t>(pairs.size()), config_hash);
    for (const auto& p : pairs) {
        put_photon(buf, p.signal);
        put_photon(buf, p.idler);
        put_u64(buf, static_cast<uint64_t>(p.dt));
    }
    spit(path, buf);
}

std::vector<CoincidencePair> read_pairs(const std::string& path) {
    Reader r(slurp(path));
    Header h = read_header(r, kPairMagic, path);
    std::vector<CoincidencePair> out;
    out.reserve(h.count);
    for (uint32_t i = 0; i < h.count; ++i) {
        CoincidencePair p;
        p.signal = get_photon(r);
        p.idler = get_photon(r);
        p.dt = static_cast<int64_t>(r.u64());
        out.push_back(p);
    }
    return out;
}

void write_truth_csv_gz(const std::string& path,
                        const std::vector<PairTruth>& truth) {
    gzFile gz = gzopen(path.c_str(), "wb");
    if (!gz) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << "pair_id,ps_x,ps_y,pi_x,pi_y,qs_x,qs_y,qi_x,qi_y,birth_ns,outcome,"
          "signal_px,signal_py,idler_px,idler_py,signal_detected,idler_detected\n";
    ss.precision(12);
    for (const auto& t : truth) {
        ss << t.pair_id << ',' << t.ps_x << ',' << t.ps_y << ',' << t.pi_x << ','
           << t.pi_y << ',' << t.qs_x << ',' << t.qs_y << ',' << t.qi_x << ','
           << t.qi_y << ',' << t.birth_ns << ','
           << static_cast<int>(t.outcome) << ',' << t.signal_px << ','
           << t.signal_py << ',' << t.idler_px << ',' << t.idler_py << ','
           << (t.signal_detected ? 1 : 0) << ',' << (t.idler_detected ? 1 : 0)
           << '\n';
    }
    std::string data = ss.str();
    if (gzwrite(gz, data.data(), static_cast<unsigned>(data.size())) !=
        static_cast<int>(data.size())) {
        gzclose(gz);
        throw std::runtime_error("gzwrite failed: " + path);
    }
    gzclose(gz);
}

std::vector<PairTruth> read_truth_csv_gz(const std::string& path) {
    gzFile gz = gzopen(path.c_str(), "rb");
    if (!gz) throw std::runtime_error("cannot open " + path);
    std::string data;
    std::array<char, 1 << 16> chunk;
    int n;
    while ((n = gzread(gz, chunk.data(), chunk.size())) > 0)
        data.append(chunk.data(), static_cast<size_t>(n));
    gzclose(gz);

    std::vector<PairTruth> out;
    std::istringstream ss(data);
    std::string line;
    std::getline(ss, line);  // header
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        PairTruth t;
        std::istringstream ls(line);
        std::string tok;
        auto next = [&] {
            if (!std::getline(ls, tok, ',')) throw std::runtime_error("bad row");
            return tok;
        };
        t.pair_id = std::stoull(next());
        t.ps_x = std::stod(next());
        t.ps_y = std::stod(next());
        t.pi_x = std::stod(next());
        t.pi_y = std::stod(next());
        t.qs_x = std::stod(next());
        t.qs_y = std::stod(next());
        t.qi_x = std::stod(next());
        t.qi_y = std::stod(next());
        t.birth_ns = std::stoull(next());
        t.outcome = static_cast<JointOutcome>(std::stoi(next()));
        t.signal_px = std::stod(next());
        t.signal_py = std::stod(next());
        t.idler_px = std::stod(next());
        t.idler_py = std::stod(next());
        t.signal_detected = std::stoi(next()) != 0;
        t.idler_detected = std::stoi(next()) != 0;
        out.push_back(t);
    }
    return out;
}

void write_matrix_csv(const std::string& path, const CorrelationMatrix& m,
                      const std::string& config_hash) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# config=" << config_hash << " basis="
        << (m.basis == SpatialBasis::momentum ? "momentum" : "position")
        << " d=" << m.d << " total=" << m.total << " dropped=" << m.dropped
        << "\n";
    out << "m";
    for (int n = 0; n < m.d; ++n) out << ",n" << n;
    out << "\n";
    for (int i = 0; i < m.d; ++i) {
        out << i;
        for (int j = 0; j < m.d; ++j) out << ',' << m.at(i, j);
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

CorrelationMatrix read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# config=", 0) != 0)
        throw std::runtime_error("bad matrix header in " + path);
    CorrelationMatrix m;
    m.basis = line.find("basis=momentum") != std::string::npos
                  ? SpatialBasis::momentum
                  : SpatialBasis::position;
    auto field = [&](const std::string& key) -> uint64_t {
        size_t p = line.find(key + "=");
        if (p == std::string::npos)
            throw std::runtime_error("missing " + key + " in " + path);
        return std::stoull(line.substr(p + key.size() + 1));
    };
    m.d = static_cast<int>(field("d"));
    m.dropped = field("dropped");
    m.counts.assign(static_cast<size_t>(m.d) * m.d, 0);
    std::getline(in, line);  // column header
    for (int i = 0; i < m.d; ++i) {
        if (!std::getline(in, line))
            throw std::runtime_error("truncated matrix in " + path);
        std::istringstream ls(line);
        std::string tok;
        std::getline(ls, tok, ',');  // row label
        for (int j = 0; j < m.d; ++j) {
            if (!std::getline(ls, tok, ','))
                throw std::runtime_error("short row in " + path);
            uint64_t v = std::stoull(tok);
            m.at(i, j) = v;
            m.total += v;
        }
    }
    return m;
}

void write_histogram_csv(const std::string& path, const Histogram1D& h,
                         const std::string& config_hash) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# config=" << config_hash << "\n";
    out << "bin_center_px,count\n";
    out.precision(12);
    for (size_t k = 0; k < h.counts.size(); ++k)
        out << h.bin_center(k) << ',' << h.counts[k] << "\n";
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    EVP_DigestUpdate(ctx, data.data(), data.size());
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(slurp(path)); }

}  // namespace hyperent
