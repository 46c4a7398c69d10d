#include "ltlm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace ltlm {

namespace {

constexpr char kMagic[4] = {'L', 'T', 'L', 'M'};

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
public:
    explicit Reader(const std::string& bytes) : bytes_(bytes) {}

    std::uint32_t u32() { return static_cast<std::uint32_t>(read(4)); }
    std::uint64_t u64() { return read(8); }
    double f64() { return std::bit_cast<double>(read(8)); }

    std::string str(std::size_t len) {
        need(len);
        std::string s = bytes_.substr(pos_, len);
        pos_ += len;
        return s;
    }

    std::size_t pos() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

    void seek(std::size_t pos) {
        require(pos <= bytes_.size(), ErrorCode::Truncated, "checkpoint is truncated");
        pos_ = pos;
    }

    void skip(std::size_t n) {
        need(n);
        pos_ += n;
    }

private:
    void need(std::size_t n) {
        if (pos_ + n > bytes_.size())
            fail(ErrorCode::Truncated, "checkpoint is truncated");
    }

    std::uint64_t read(std::size_t n) {
        need(n);
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < n; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += n;
        return v;
    }

    const std::string& bytes_;
    std::size_t pos_ = 0;
};

std::string format_header(const Checkpoint& cp) {
    std::ostringstream h;
    h.precision(17);
    h << "vocab_size=" << cp.config.vocab_size << '\n'
      << "input_dim=" << cp.config.input_dim << '\n'
      << "context_dim=" << cp.config.context_dim << '\n'
      << "hidden_size=" << cp.config.hidden_size << '\n'
      << "extension=" << (cp.config.extension ? 1 : 0) << '\n'
      << "weighting=" << weighting_kind_name(cp.config.weighting) << '\n'
      << "alpha=" << cp.config.alpha << '\n'
      << "history=" << cp.config.history << '\n'
      << "precision=f64\n"
      << "vocab_hash=" << cp.meta.vocab_hash << '\n'
      << "epoch=" << cp.meta.epoch << '\n'
      << "lr=" << cp.meta.lr << '\n'
      << "seed=" << cp.meta.seed << '\n';
    if (cp.idf) h << "idf_documents=" << cp.idf->document_count << '\n';
    return h.str();
}

std::map<std::string, std::string> parse_header(const std::string& header) {
    std::map<std::string, std::string> kv;
    std::istringstream in(header);
    std::string line;
    while (std::getline(in, line)) {
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorCode::Format, "checkpoint header line lacks '=': " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

const std::string& header_get(const std::map<std::string, std::string>& kv,
                              const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) fail(ErrorCode::Format, "checkpoint header lacks key '" + key + "'");
    return it->second;
}

} // namespace

void save_checkpoint(const std::string& path, const Checkpoint& cp) {
    require(cp.params.all_finite(), ErrorCode::Numeric,
            "save_checkpoint: parameters contain non-finite values");

    std::string payload;
    const std::string header = format_header(cp);
    put_u32(payload, static_cast<std::uint32_t>(header.size()));
    payload += header;

    std::vector<const Matrix*> tensors = cp.params.tensors();
    std::vector<std::string> names = ModelParameters::tensor_names(cp.config);
    require(tensors.size() == names.size(), ErrorCode::Internal, "tensor naming out of sync");

    Matrix idf_matrix;
    if (cp.idf) {
        idf_matrix = Matrix(cp.idf->weights.size(), 1);
        for (std::size_t i = 0; i < cp.idf->weights.size(); ++i)
            idf_matrix(i, 0) = cp.idf->weights[i];
        tensors.push_back(&idf_matrix);
        names.push_back("context_idf");
    }

    put_u32(payload, static_cast<std::uint32_t>(tensors.size()));
    for (std::size_t t = 0; t < tensors.size(); ++t) {
        put_u32(payload, static_cast<std::uint32_t>(names[t].size()));
        payload += names[t];
        put_u64(payload, tensors[t]->rows());
        put_u64(payload, tensors[t]->cols());
        for (double v : tensors[t]->data()) put_f64(payload, v);
    }

    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kCheckpointVersion);
    out += payload;
    put_u64(out, fnv1a(payload));

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    require(file.good(), ErrorCode::Io, "cannot write checkpoint: " + path);
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    require(file.good(), ErrorCode::Io, "checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    require(file.good(), ErrorCode::Io, "cannot open checkpoint: " + path);
    std::ostringstream buf;
    buf << file.rdbuf();
    const std::string bytes = buf.str();

    require(bytes.size() >= 8, ErrorCode::Truncated, "checkpoint is truncated");
    require(std::memcmp(bytes.data(), kMagic, 4) == 0, ErrorCode::Format,
            "not a checkpoint file (bad magic): " + path);

    Reader reader(bytes);
    reader.str(4); // magic
    const std::uint32_t version = reader.u32();
    if (version != kCheckpointVersion)
        fail(ErrorCode::Version, "unsupported checkpoint format version " +
                                     std::to_string(version) + " (supported: " +
                                     std::to_string(kCheckpointVersion) + ")");

    // Walk the declared structure first so truncation is reported as such,
    // then verify the checksum before trusting any of the payload.
    const std::size_t payload_start = reader.pos();
    const std::uint32_t header_len = reader.u32();
    const std::string header = reader.str(header_len);
    const std::uint32_t tensor_count = reader.u32();

    struct RawTensor {
        std::string name;
        std::uint64_t rows, cols;
        std::size_t data_pos;
    };
    std::vector<RawTensor> raw(tensor_count);
    for (auto& t : raw) {
        const std::uint32_t name_len = reader.u32();
        t.name = reader.str(name_len);
        t.rows = reader.u64();
        t.cols = reader.u64();
        t.data_pos = reader.pos();
        require(t.cols == 0 || t.rows <= reader.remaining() / 8 / t.cols,
                ErrorCode::Truncated, "checkpoint is truncated");
        reader.skip(t.rows * t.cols * 8);
    }
    const std::size_t payload_end = reader.pos();
    require(reader.remaining() >= 8, ErrorCode::Truncated, "checkpoint is truncated");
    require(reader.remaining() == 8, ErrorCode::Format, "checkpoint has trailing bytes");
    const std::uint64_t stored_checksum = reader.u64();
    const std::uint64_t actual =
        fnv1a(bytes.substr(payload_start, payload_end - payload_start));
    require(stored_checksum == actual, ErrorCode::Checksum,
            "checkpoint checksum mismatch (file is corrupted)");

    Checkpoint cp;
    auto kv = parse_header(header);
    cp.config.vocab_size = std::stoull(header_get(kv, "vocab_size"));
    cp.config.input_dim = std::stoull(header_get(kv, "input_dim"));
    cp.config.context_dim = std::stoull(header_get(kv, "context_dim"));
    cp.config.hidden_size = std::stoull(header_get(kv, "hidden_size"));
    cp.config.extension = header_get(kv, "extension") == "1";
    cp.config.weighting = parse_weighting_kind(header_get(kv, "weighting"));
    cp.config.alpha = std::stod(header_get(kv, "alpha"));
    cp.config.history = std::stoull(header_get(kv, "history"));
    cp.meta.vocab_hash = std::stoull(header_get(kv, "vocab_hash"));
    cp.meta.epoch = std::stoll(header_get(kv, "epoch"));
    cp.meta.lr = std::stod(header_get(kv, "lr"));
    cp.meta.seed = std::stoull(header_get(kv, "seed"));
    cp.config.validate();

    cp.params = ModelParameters::zeros(cp.config);
    std::vector<Matrix*> tensors = cp.params.tensors();
    std::vector<std::string> names = ModelParameters::tensor_names(cp.config);

    auto read_into = [&bytes](Matrix& m, const RawTensor& t) {
        require(m.rows() == t.rows && m.cols() == t.cols, ErrorCode::Format,
                "checkpoint tensor '" + t.name + "' has unexpected shape");
        Reader r(bytes);
        r.seek(t.data_pos);
        for (double& v : m.data()) v = r.f64();
    };

    std::size_t expected = names.size();
    if (kv.count("idf_documents")) ++expected;
    require(raw.size() == expected, ErrorCode::Format,
            "checkpoint tensor count does not match its configuration");

    for (const auto& t : raw) {
        if (t.name == "context_idf") {
            require(kv.count("idf_documents") > 0, ErrorCode::Format,
                    "checkpoint has an idf tensor but no document count");
            Matrix m(t.rows, t.cols);
            read_into(m, t);
            IdfTable idf;
            idf.document_count = std::stoll(kv.at("idf_documents"));
            idf.weights.assign(m.data().begin(), m.data().end());
            cp.idf = std::move(idf);
            continue;
        }
        bool matched = false;
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == t.name) {
                read_into(*tensors[i], t);
                matched = true;
                break;
            }
        }
        require(matched, ErrorCode::Format, "checkpoint has unknown tensor '" + t.name + "'");
    }
    if (cp.config.weighting == WeightingKind::WordDependent)
        require(cp.idf.has_value(), ErrorCode::Format,
                "word-dependent checkpoint lacks its idf table");
    return cp;
}

} // namespace ltlm
