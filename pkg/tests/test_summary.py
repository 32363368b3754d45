import pytest

from cseiz.chbmit import parse_summary
from cseiz.errors import SummaryParseError

CHB01_STYLE = """\
Data Sampling Rate: 256 Hz

File Name: chb01_03.edf
File Start Time: 13:43:04
File End Time: 14:43:04
Number of Seizures in File: 1
Seizure Start Time: 2996 seconds
Seizure End Time: 3036 seconds

File Name: chb01_05.edf
File Start Time: 14:43:12
File End Time: 15:43:12
Number of Seizures in File: 0
"""

NUMBERED_STYLE = """\
File Name: chb17a_03.edf
Number of Seizures in File: 2
Seizure 1 Start Time: 2282 seconds
Seizure 1 End Time: 2372 seconds
Seizure 2 Start Time: 3025 seconds
Seizure 2 End Time: 3140 seconds
"""


def test_single_seizure_entry():
    anns = parse_summary(CHB01_STYLE)
    assert len(anns) == 1
    a = anns[0]
    assert a.record_id == "chb01_03"
    assert a.onset_s == 2996.0
    assert a.offset_s == 3036.0


def test_zero_seizure_file_contributes_nothing():
    anns = parse_summary(CHB01_STYLE)
    assert all(a.record_id != "chb01_05" for a in anns)


def test_numbered_seizure_variant():
    anns = parse_summary(NUMBERED_STYLE)
    assert [(a.onset_s, a.offset_s) for a in anns] == [
        (2282.0, 2372.0), (3025.0, 3140.0)]


def test_start_not_before_end_rejected():
    bad = CHB01_STYLE.replace("Seizure End Time: 3036", "Seizure End Time: 2996")
    with pytest.raises(SummaryParseError, match="precede"):
        parse_summary(bad)


def test_non_numeric_time_reports_line_number():
    bad = CHB01_STYLE.replace("2996 seconds", "29x6 seconds")
    with pytest.raises(SummaryParseError) as err:
        parse_summary(bad)
    assert err.value.line_no == 7


def test_start_without_end_rejected():
    bad = CHB01_STYLE.replace("Seizure End Time: 3036 seconds\n", "")
    with pytest.raises(SummaryParseError, match="without matching end"):
        parse_summary(bad)


def test_full_chb01_summary_has_seven_annotations(chb01):
    # count independently established by scanning the corpus summary
    assert len(chb01.annotations) == 7
    by_id = {a.record_id: a for a in chb01.annotations}
    assert by_id["chb01_03"].onset_s == 2996.0
    assert by_id["chb01_03"].offset_s == 3036.0
