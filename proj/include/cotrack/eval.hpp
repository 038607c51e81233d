#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cotrack/geometry.hpp"

namespace cotrack {

// An image-sequence dataset in the de-facto benchmark layout:
// <dir>/img/<zero-padded frames>.png|jpg and <dir>/groundtruth_rect.txt.
struct SequenceDataset {
    std::string name;
    std::vector<std::string> frame_paths;
    std::vector<BBox> gt_boxes;
};

// Success-over-threshold analysis of a run's per-frame overlaps.
struct EvalReport {
    std::vector<double> per_frame_overlap;
    double average_overlap = 0.0;
    std::vector<double> success_curve; // sampled at t = 0.00, 0.01, ..., 1.00
    double auc = 0.0;                  // mean of the curve samples
};

// curve(t) = fraction of overlaps strictly greater than t. Empty input or
// values outside [0, 1] -> InvalidArgument.
EvalReport success_analysis(const std::vector<double>& overlaps);

// Loads frames (numeric sort) and ground truth ("x,y,w,h" per line, comma or
// tab separated, 1-based origin converted to 0-based). Missing files ->
// IoError; count mismatch or an unparsable line -> DataError.
SequenceDataset load_otb_sequence(const std::string& dir);

// Comparison table: one row per sequence, one column per tracker/config.
struct ReportTable {
    std::vector<std::string> columns;
    struct Row {
        std::string sequence;
        std::vector<std::optional<EvalReport>> cells; // nullopt renders FAILED
    };
    std::vector<Row> rows;
};

// Table with the average overlap to 3 decimals, the best value per row
// highlighted, and a closing mean row.
std::string render_report_table(const ReportTable& table);

// Single-column convenience form.
std::string render_report(const std::vector<std::pair<std::string, EvalReport>>& rows);

// CSV mirror with full precision, header "sequence,avg_overlap,auc"; failed
// cells are skipped, a final mean row closes the file.
void write_report_csv(const std::vector<std::pair<std::string, EvalReport>>& rows,
                      const std::string& path);

// Per-frame boxes with header "frame,x,y,w,h".
void write_boxes_csv(const std::vector<BBox>& boxes, const std::string& path);
std::vector<BBox> read_boxes_csv(const std::string& path);

} // namespace cotrack
