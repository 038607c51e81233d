#include "cotrack/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cotrack/errors.hpp"

namespace fs = std::filesystem;

namespace cotrack {

EvalReport success_analysis(const std::vector<double>& overlaps) {
    if (overlaps.empty())
        throw InvalidArgument("success_analysis: empty overlap list");
    for (double o : overlaps)
        if (!(o >= 0.0 && o <= 1.0))
            throw InvalidArgument("success_analysis: overlaps must be in [0, 1]");

    EvalReport rep;
    rep.per_frame_overlap = overlaps;
    double sum = 0.0;
    for (double o : overlaps)
        sum += o;
    rep.average_overlap = sum / overlaps.size();

    rep.success_curve.resize(101);
    double auc = 0.0;
    for (int k = 0; k <= 100; ++k) {
        const double t = k / 100.0;
        int hits = 0;
        for (double o : overlaps)
            if (o > t)
                ++hits;
        rep.success_curve[k] = static_cast<double>(hits) / overlaps.size();
        auc += rep.success_curve[k];
    }
    rep.auc = auc / 101.0;
    return rep;
}

namespace {

bool has_image_extension(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

// Numeric sort key: the last digit run in the stem ("0001", "img005", ...).
long frame_number(const fs::path& p) {
    const std::string stem = p.stem().string();
    long value = -1;
    std::size_t i = stem.size();
    while (i > 0 && !std::isdigit(static_cast<unsigned char>(stem[i - 1])))
        --i;
    std::size_t end = i;
    while (i > 0 && std::isdigit(static_cast<unsigned char>(stem[i - 1])))
        --i;
    if (end > i)
        value = std::strtol(stem.substr(i, end - i).c_str(), nullptr, 10);
    return value;
}

std::vector<std::string> split_gt_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',' || ch == '\t') {
            fields.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(ch))) {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

SequenceDataset load_otb_sequence(const std::string& dir) {
    const fs::path root(dir);
    const fs::path img_dir = root / "img";
    const fs::path gt_file = root / "groundtruth_rect.txt";
    if (!fs::is_directory(img_dir))
        throw IoError("sequence: missing image directory \"" + img_dir.string() + "\"");
    if (!fs::is_regular_file(gt_file))
        throw IoError("sequence: missing ground truth \"" + gt_file.string() + "\"");

    SequenceDataset ds;
    ds.name = root.filename().string();
    if (ds.name.empty())
        ds.name = root.parent_path().filename().string();

    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(img_dir))
        if (entry.is_regular_file() && has_image_extension(entry.path()))
            paths.push_back(entry.path());
    std::sort(paths.begin(), paths.end(), [](const fs::path& a, const fs::path& b) {
        const long na = frame_number(a), nb = frame_number(b);
        if (na != nb)
            return na < nb;
        return a.filename().string() < b.filename().string();
    });
    for (const auto& p : paths)
        ds.frame_paths.push_back(p.string());
    if (ds.frame_paths.empty())
        throw DataError("sequence: no frames in \"" + img_dir.string() + "\"");

    std::ifstream in(gt_file);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r")
            continue;
        const auto fields = split_gt_line(line);
        if (fields.size() != 4)
            throw DataError("sequence: ground-truth line " + std::to_string(lineno) +
                            " does not hold 4 values");
        double v[4];
        for (int k = 0; k < 4; ++k) {
            try {
                std::size_t pos = 0;
                v[k] = std::stod(fields[k], &pos);
                if (pos != fields[k].size())
                    throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw DataError("sequence: unparsable ground-truth line " +
                                std::to_string(lineno));
            }
        }
        // 1-based benchmark convention to the 0-based pixel origin.
        BBox b{v[0] - 1.0, v[1] - 1.0, v[2], v[3]};
        if (!b.valid())
            throw DataError("sequence: degenerate box on ground-truth line " +
                            std::to_string(lineno));
        ds.gt_boxes.push_back(b);
    }
    if (ds.gt_boxes.size() != ds.frame_paths.size())
        throw DataError("sequence: " + std::to_string(ds.frame_paths.size()) + " frames but " +
                        std::to_string(ds.gt_boxes.size()) + " ground-truth lines");
    return ds;
}

namespace {

std::string format_avg(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

} // namespace

std::string render_report_table(const ReportTable& table) {
    if (table.rows.empty())
        throw InvalidArgument("render_report_table: no rows");

    std::vector<std::string> headers = table.columns;
    if (headers.empty())
        headers.push_back("avg_overlap");

    std::ostringstream out;
    std::size_t name_w = std::string("sequence").size();
    for (const auto& row : table.rows)
        name_w = std::max(name_w, (row.sequence.empty() ? std::string("(unnamed)")
                                                        : row.sequence)
                                      .size());
    std::vector<std::size_t> col_w(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c)
        col_w[c] = std::max<std::size_t>(headers[c].size(), 8);

    auto pad = [](const std::string& s, std::size_t w) {
        return s + std::string(w > s.size() ? w - s.size() : 0, ' ');
    };

    out << pad("sequence", name_w);
    for (std::size_t c = 0; c < headers.size(); ++c)
        out << "  " << pad(headers[c], col_w[c]);
    out << "\n";

    std::vector<double> col_sum(headers.size(), 0.0);
    std::vector<int> col_count(headers.size(), 0);
    for (const auto& row : table.rows) {
        out << pad(row.sequence.empty() ? "(unnamed)" : row.sequence, name_w);
        int best = -1;
        for (std::size_t c = 0; c < row.cells.size() && c < headers.size(); ++c)
            if (row.cells[c] &&
                (best < 0 || row.cells[c]->average_overlap >
                                 row.cells[static_cast<std::size_t>(best)]->average_overlap))
                best = static_cast<int>(c);
        for (std::size_t c = 0; c < headers.size(); ++c) {
            std::string cell = "FAILED";
            if (c < row.cells.size() && row.cells[c]) {
                cell = format_avg(row.cells[c]->average_overlap);
                if (static_cast<int>(c) == best && row.cells.size() > 1)
                    cell = "*" + cell + "*";
                col_sum[c] += row.cells[c]->average_overlap;
                col_count[c] += 1;
            }
            out << "  " << pad(cell, col_w[c]);
        }
        out << "\n";
    }
    out << pad("mean", name_w);
    for (std::size_t c = 0; c < headers.size(); ++c) {
        const std::string cell =
            col_count[c] > 0 ? format_avg(col_sum[c] / col_count[c]) : "FAILED";
        out << "  " << pad(cell, col_w[c]);
    }
    out << "\n";
    return out.str();
}

std::string render_report(const std::vector<std::pair<std::string, EvalReport>>& rows) {
    ReportTable table;
    table.columns = {"avg_overlap"};
    for (const auto& [name, rep] : rows)
        table.rows.push_back({name, {rep}});
    return render_report_table(table);
}

void write_report_csv(const std::vector<std::pair<std::string, EvalReport>>& rows,
                      const std::string& path) {
    if (rows.empty())
        throw InvalidArgument("write_report_csv: no rows");
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write report \"" + path + "\"");
    out << "sequence,avg_overlap,auc\n";
    out.precision(17);
    double sum_avg = 0.0, sum_auc = 0.0;
    for (const auto& [name, rep] : rows) {
        out << (name.empty() ? "(unnamed)" : name) << "," << rep.average_overlap << ","
            << rep.auc << "\n";
        sum_avg += rep.average_overlap;
        sum_auc += rep.auc;
    }
    out << "mean," << sum_avg / rows.size() << "," << sum_auc / rows.size() << "\n";
}

void write_boxes_csv(const std::vector<BBox>& boxes, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write boxes \"" + path + "\"");
    out << "frame,x,y,w,h\n";
    out.precision(17);
    for (std::size_t i = 0; i < boxes.size(); ++i)
        out << i << "," << boxes[i].x << "," << boxes[i].y << "," << boxes[i].w << ","
            << boxes[i].h << "\n";
}

std::vector<BBox> read_boxes_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read boxes \"" + path + "\"");
    std::string line;
    if (!std::getline(in, line) || line.rfind("frame,x,y,w,h", 0) != 0)
        throw DataError("boxes csv: missing \"frame,x,y,w,h\" header in \"" + path + "\"");
    std::vector<BBox> boxes;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        double v[5];
        std::stringstream ss(line);
        std::string field;
        int k = 0;
        while (std::getline(ss, field, ',') && k < 5) {
            try {
                v[k++] = std::stod(field);
            } catch (const std::exception&) {
                throw DataError("boxes csv: unparsable line " + std::to_string(lineno));
            }
        }
        if (k != 5)
            throw DataError("boxes csv: line " + std::to_string(lineno) +
                            " does not hold 5 values");
        boxes.push_back({v[1], v[2], v[3], v[4]});
    }
    if (boxes.empty())
        throw DataError("boxes csv: no rows in \"" + path + "\"");
    return boxes;
}

} // namespace cotrack
