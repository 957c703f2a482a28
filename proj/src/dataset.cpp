#include "gantsne/dataset.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

namespace gantsne {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_be32(std::istream& in, const std::string& what) {
    std::array<unsigned char, 4> buf{};
    in.read(reinterpret_cast<char*>(buf.data()), 4);
    if (!in) throw LengthError("unexpected end of file while reading " + what);
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
    const std::array<unsigned char, 4> buf = {
        static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
        static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(buf.data()), 4);
}

std::ifstream open_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    return in;
}

// Affine map raw -> target applied per the documented formulas.
double to_raw(double v, PixelRange from) {
    switch (from) {
        case PixelRange::Raw0_255: return v;
        case PixelRange::Unit0_1: return v * 255.0;
        case PixelRange::Sym1_1: return (v + 1.0) * 127.5;
    }
    return v;
}

double from_raw(double raw, PixelRange to) {
    switch (to) {
        case PixelRange::Raw0_255: return raw;
        case PixelRange::Unit0_1: return raw / 255.0;
        case PixelRange::Sym1_1: return raw / 127.5 - 1.0;
    }
    return raw;
}

bool parse_double(std::string_view field, double& out) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    // tolerate surrounding spaces and \r from CRLF files
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    while (last > first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
    if (first == last) return false;
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

} // namespace

LabeledDataset load_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path) {
    auto img = open_binary(images_path);
    const std::uint32_t img_magic = read_be32(img, "image magic");
    if (img_magic != kImagesMagic) {
        throw FormatError("bad magic in " + images_path.string() + ": expected 0x00000803");
    }
    const std::uint32_t n_images = read_be32(img, "image count");
    const std::uint32_t rows = read_be32(img, "image rows");
    const std::uint32_t cols = read_be32(img, "image cols");
    if (std::size_t(rows) * cols != kImagePixels) {
        throw FormatError(images_path.string() + ": expected 28x28 images, header says " +
                          std::to_string(rows) + "x" + std::to_string(cols));
    }

    auto lab = open_binary(labels_path);
    const std::uint32_t lab_magic = read_be32(lab, "label magic");
    if (lab_magic != kLabelsMagic) {
        throw FormatError("bad magic in " + labels_path.string() + ": expected 0x00000801");
    }
    const std::uint32_t n_labels = read_be32(lab, "label count");
    if (n_images != n_labels) {
        throw ConsistencyError("image count " + std::to_string(n_images) +
                               " does not match label count " + std::to_string(n_labels));
    }

    LabeledDataset ds;
    ds.range = PixelRange::Raw0_255;
    ds.images = Matrix(n_images, kImagePixels);
    ds.labels.resize(n_images);

    std::vector<unsigned char> buf(kImagePixels);
    for (std::uint32_t i = 0; i < n_images; ++i) {
        img.read(reinterpret_cast<char*>(buf.data()), kImagePixels);
        if (!img) {
            throw LengthError(images_path.string() + ": truncated at image " + std::to_string(i));
        }
        double* out = ds.images.data() + std::size_t(i) * kImagePixels;
        for (std::size_t k = 0; k < kImagePixels; ++k) out[k] = double(buf[k]);
    }
    std::vector<unsigned char> lbuf(n_labels);
    lab.read(reinterpret_cast<char*>(lbuf.data()), n_labels);
    if (!lab) throw LengthError(labels_path.string() + ": truncated label payload");
    for (std::uint32_t i = 0; i < n_labels; ++i) {
        if (lbuf[i] > 9) {
            throw ValueError(labels_path.string() + ": label " + std::to_string(int(lbuf[i])) +
                             " at index " + std::to_string(i) + " outside [0,9]");
        }
        ds.labels[i] = int(lbuf[i]);
    }
    return ds;
}

void save_idx(const LabeledDataset& ds,
              const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path) {
    if (ds.range != PixelRange::Raw0_255) {
        throw InputError("save_idx expects Raw0_255 data");
    }
    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw FormatError("cannot write " + images_path.string());
    write_be32(img, kImagesMagic);
    write_be32(img, std::uint32_t(ds.n()));
    write_be32(img, kImageSide);
    write_be32(img, kImageSide);
    std::vector<unsigned char> buf(kImagePixels);
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const double* row = ds.images.data() + i * kImagePixels;
        for (std::size_t k = 0; k < kImagePixels; ++k) {
            double v = std::round(row[k]);
            if (v < 0.0) v = 0.0;
            if (v > 255.0) v = 255.0;
            buf[k] = static_cast<unsigned char>(v);
        }
        img.write(reinterpret_cast<const char*>(buf.data()), kImagePixels);
    }

    std::ofstream lab(labels_path, std::ios::binary);
    if (!lab) throw FormatError("cannot write " + labels_path.string());
    write_be32(lab, kLabelsMagic);
    write_be32(lab, std::uint32_t(ds.n()));
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const unsigned char b = static_cast<unsigned char>(ds.labels[i]);
        lab.write(reinterpret_cast<const char*>(&b), 1);
    }
}

LabeledDataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());

    std::vector<double> pixels;
    std::vector<int> labels;
    std::string line;
    std::size_t line_no = 0;
    bool first_data_line = true;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;

        // split on commas
        std::vector<std::string_view> fields;
        fields.reserve(kImagePixels + 1);
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            if (comma == std::string_view::npos) {
                fields.push_back(rest);
                break;
            }
            fields.push_back(rest.substr(0, comma));
            rest.remove_prefix(comma + 1);
        }

        double label_value = 0.0;
        if (first_data_line && !parse_double(fields[0], label_value)) {
            // single header row, auto-detected
            first_data_line = false;
            continue;
        }
        first_data_line = false;

        if (fields.size() != kImagePixels + 1) {
            throw FormatError(path.string() + ": line " + std::to_string(line_no) +
                              " has " + std::to_string(fields.size()) +
                              " fields, expected 785");
        }
        if (!parse_double(fields[0], label_value)) {
            throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                             ": label '" + std::string(fields[0]) + "' is not numeric");
        }
        const double rounded = std::round(label_value);
        if (rounded != label_value || rounded < 0.0 || rounded > 9.0) {
            throw ValueError(path.string() + ": line " + std::to_string(line_no) +
                             ": label " + std::string(fields[0]) + " outside [0,9]");
        }
        labels.push_back(int(rounded));
        for (std::size_t k = 1; k < fields.size(); ++k) {
            double v = 0.0;
            if (!parse_double(fields[k], v)) {
                throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                                 ", column " + std::to_string(k + 1) + ": '" +
                                 std::string(fields[k]) + "' is not numeric");
            }
            if (v < 0.0 || v > 255.0) {
                throw ValueError(path.string() + ": line " + std::to_string(line_no) +
                                 ", column " + std::to_string(k + 1) + ": pixel " +
                                 std::string(fields[k]) + " outside [0,255]");
            }
            pixels.push_back(v);
        }
    }

    LabeledDataset ds;
    ds.range = PixelRange::Raw0_255;
    ds.labels = std::move(labels);
    ds.images = Matrix(ds.labels.size(), kImagePixels);
    if (!pixels.empty()) {
        std::memcpy(ds.images.data(), pixels.data(), pixels.size() * sizeof(double));
    }
    return ds;
}

std::string format_double(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        return std::to_string(static_cast<long long>(v));
    }
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

void save_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path.string());
    std::string line;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        line.clear();
        line += std::to_string(ds.labels[i]);
        const double* row = ds.images.data() + i * kImagePixels;
        for (std::size_t k = 0; k < kImagePixels; ++k) {
            line += ',';
            line += format_double(row[k]);
        }
        line += '\n';
        out << line;
    }
}

LabeledDataset normalize(const LabeledDataset& ds, PixelRange target) {
    if (ds.range == target) return ds;
    LabeledDataset out = ds;
    out.range = target;
    double* p = out.images.data();
    const std::size_t total = out.images.size();
    for (std::size_t i = 0; i < total; ++i) {
        p[i] = from_raw(to_raw(p[i], ds.range), target);
    }
    return out;
}

LabeledDataset filter_by_label(const LabeledDataset& ds, int digit) {
    if (digit < 0 || digit > 9) {
        throw InputError("filter_by_label: digit " + std::to_string(digit) +
                         " outside [0,9]");
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        if (ds.labels[i] == digit) keep.push_back(i);
    }
    LabeledDataset out;
    out.range = ds.range;
    out.images = Matrix(keep.size(), kImagePixels);
    out.labels.resize(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        const double* src = ds.images.data() + keep[i] * kImagePixels;
        std::memcpy(out.images.data() + i * kImagePixels, src,
                    kImagePixels * sizeof(double));
        out.labels[i] = ds.labels[keep[i]];
    }
    return out;
}

LabeledDataset sample_n(const LabeledDataset& ds, std::size_t n, Rng& rng) {
    if (n > ds.n()) {
        throw InputError("sample_n: requested " + std::to_string(n) + " of " +
                         std::to_string(ds.n()) + " rows");
    }
    std::vector<std::size_t> idx(ds.n());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    // partial Fisher-Yates: the first n slots end up a uniform sample
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + rng.below(idx.size() - i);
        std::swap(idx[i], idx[j]);
    }
    LabeledDataset out;
    out.range = ds.range;
    out.images = Matrix(n, kImagePixels);
    out.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* src = ds.images.data() + idx[i] * kImagePixels;
        std::memcpy(out.images.data() + i * kImagePixels, src,
                    kImagePixels * sizeof(double));
        out.labels[i] = ds.labels[idx[i]];
    }
    return out;
}

} // namespace gantsne
