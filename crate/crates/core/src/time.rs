//! Month-granularity calendar points, validity intervals, and offsets.
//!
//! Every value here is an immutable `Copy` type. Points are totally ordered
//! by `(year, month)`, which is also their absolute month index order.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const MIN_YEAR: i32 = 1;
pub const MAX_YEAR: i32 = 9999;

const MONTH_ABBREV: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];
const MONTH_FULL: [&str; 12] = [
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TimeError {
    #[error("month {0} is outside 1..=12")]
    InvalidMonth(u32),
    #[error("year {0} is outside {MIN_YEAR}..={MAX_YEAR}")]
    YearOutOfRange(i64),
    #[error("cannot parse time '{input}': bad token '{token}'")]
    Parse { input: String, token: String },
    #[error("offset of zero years and zero months")]
    ZeroOffset,
    #[error("interval end {end} precedes start {start}")]
    InvertedInterval { start: TimePoint, end: TimePoint },
}

/// A calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimePoint {
    year: i32,
    month: u8,
}

impl TimePoint {
    pub fn new(year: i32, month: u32) -> Result<Self, TimeError> {
        if !(1..=12).contains(&month) {
            return Err(TimeError::InvalidMonth(month));
        }
        if !(MIN_YEAR..=MAX_YEAR).contains(&year) {
            return Err(TimeError::YearOutOfRange(year as i64));
        }
        Ok(Self {
            year,
            month: month as u8,
        })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u32 {
        self.month as u32
    }

    /// Months elapsed since January of year 0.
    pub fn month_index(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    pub fn from_month_index(index: i64) -> Result<Self, TimeError> {
        let year = index.div_euclid(12);
        let month = index.rem_euclid(12) as u32 + 1;
        if year < MIN_YEAR as i64 || year > MAX_YEAR as i64 {
            return Err(TimeError::YearOutOfRange(year));
        }
        Self::new(year as i32, month)
    }

    /// Moves this point by `delta` months (negative goes back in time).
    pub fn add_months(self, delta: i64) -> Result<Self, TimeError> {
        Self::from_month_index(self.month_index() + delta)
    }

    pub fn shift(self, offset: Offset) -> Result<Self, TimeError> {
        self.add_months(offset.signed_months())
    }

    pub fn compare(self, other: Self) -> Ordering {
        self.cmp(&other)
    }

    /// Number of months from `self` to `later`, inclusive of both ends.
    pub fn months_through(self, later: Self) -> i64 {
        later.month_index() - self.month_index() + 1
    }

    /// Year-only rendering, e.g. `1905`.
    pub fn format_year(self) -> String {
        self.year.to_string()
    }
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", MONTH_ABBREV[self.month as usize - 1], self.year)
    }
}

impl FromStr for TimePoint {
    type Err = TimeError;

    /// Accepts only the month form `Mon YYYY`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parsed = parse_time(s)?;
        match parsed.granularity {
            Granularity::Month => Ok(parsed.point),
            Granularity::Year => Err(TimeError::Parse {
                input: s.to_string(),
                token: s.trim().to_string(),
            }),
        }
    }
}

impl Serialize for TimePoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TimePoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Month,
    Year,
}

/// A parsed time expression. Bare years keep a year-only display mode and
/// are stored as January of that year.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeExpr {
    pub point: TimePoint,
    pub granularity: Granularity,
}

impl TimeExpr {
    pub fn month(point: TimePoint) -> Self {
        Self {
            point,
            granularity: Granularity::Month,
        }
    }

    pub fn year(point: TimePoint) -> Self {
        Self {
            point,
            granularity: Granularity::Year,
        }
    }
}

impl fmt::Display for TimeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.granularity {
            Granularity::Month => self.point.fmt(f),
            Granularity::Year => write!(f, "{}", self.point.year),
        }
    }
}

/// Parses `Mon YYYY` (abbreviated or full English month name, any case) or a
/// bare `YYYY`.
pub fn parse_time(s: &str) -> Result<TimeExpr, TimeError> {
    let err = |token: &str| TimeError::Parse {
        input: s.to_string(),
        token: token.to_string(),
    };
    let mut tokens = s.split_whitespace();
    let (month_tok, year_tok) = match (tokens.next(), tokens.next(), tokens.next()) {
        (Some(y), None, _) => (None, y),
        (Some(m), Some(y), None) => (Some(m), y),
        (None, _, _) => return Err(err("")),
        (Some(_), Some(_), Some(extra)) => return Err(err(extra)),
    };
    let year: i64 = year_tok
        .parse()
        .ok()
        .filter(|_| year_tok.bytes().all(|b| b.is_ascii_digit()))
        .ok_or_else(|| err(year_tok))?;
    if year < MIN_YEAR as i64 || year > MAX_YEAR as i64 {
        return Err(TimeError::YearOutOfRange(year));
    }
    match month_tok {
        None => Ok(TimeExpr::year(TimePoint::new(year as i32, 1)?)),
        Some(m) => {
            let month = month_number(m).ok_or_else(|| err(m))?;
            Ok(TimeExpr::month(TimePoint::new(year as i32, month)?))
        }
    }
}

pub fn format_time(t: TimePoint) -> String {
    t.to_string()
}

fn month_number(token: &str) -> Option<u32> {
    let lower = token.trim_end_matches('.').to_ascii_lowercase();
    MONTH_FULL
        .iter()
        .position(|full| lower == *full || (lower.len() == 3 && full.starts_with(&lower)))
        .map(|i| i as u32 + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Before,
    After,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Before => Direction::After,
            Direction::After => Direction::Before,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Before => "before",
            Direction::After => "after",
        }
    }

    /// The ordering a point in this direction has relative to its pivot.
    pub fn ordering(self) -> Ordering {
        match self {
            Direction::Before => Ordering::Less,
            Direction::After => Ordering::Greater,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A non-zero displacement of whole years and months in one direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawOffset")]
pub struct Offset {
    years: u32,
    months: u32,
    direction: Direction,
}

#[derive(Deserialize)]
struct RawOffset {
    years: u32,
    months: u32,
    direction: Direction,
}

impl TryFrom<RawOffset> for Offset {
    type Error = TimeError;

    fn try_from(raw: RawOffset) -> Result<Self, Self::Error> {
        Offset::new(raw.years, raw.months, raw.direction)
    }
}

impl Offset {
    pub fn new(years: u32, months: u32, direction: Direction) -> Result<Self, TimeError> {
        if years == 0 && months == 0 {
            return Err(TimeError::ZeroOffset);
        }
        Ok(Self {
            years,
            months,
            direction,
        })
    }

    pub fn years(self) -> u32 {
        self.years
    }

    pub fn months(self) -> u32 {
        self.months
    }

    pub fn direction(self) -> Direction {
        self.direction
    }

    pub fn total_months(self) -> i64 {
        self.years as i64 * 12 + self.months as i64
    }

    pub fn signed_months(self) -> i64 {
        match self.direction {
            Direction::Before => -self.total_months(),
            Direction::After => self.total_months(),
        }
    }

    /// Same magnitude, opposite direction.
    pub fn mirror(self) -> Self {
        Self {
            direction: self.direction.flip(),
            ..self
        }
    }
}

pub fn shift(t: TimePoint, offset: Offset) -> Result<TimePoint, TimeError> {
    t.shift(offset)
}

/// A validity range with inclusive bounds; a missing end marks an ongoing fact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeInterval {
    start: TimePoint,
    end: Option<TimePoint>,
}

impl TimeInterval {
    pub fn new(start: TimePoint, end: Option<TimePoint>) -> Result<Self, TimeError> {
        if let Some(end) = end {
            if end < start {
                return Err(TimeError::InvertedInterval { start, end });
            }
        }
        Ok(Self { start, end })
    }

    pub fn closed(start: TimePoint, end: TimePoint) -> Result<Self, TimeError> {
        Self::new(start, Some(end))
    }

    pub fn start(&self) -> TimePoint {
        self.start
    }

    pub fn end(&self) -> Option<TimePoint> {
        self.end
    }

    pub fn is_open(&self) -> bool {
        self.end.is_none()
    }

    pub fn contains(&self, p: TimePoint) -> bool {
        self.start <= p && self.end.is_none_or(|end| p <= end)
    }

    /// End bound after closing an open interval at `snapshot`. An ongoing
    /// fact that starts after the snapshot is closed at its own start.
    pub fn end_at(&self, snapshot: TimePoint) -> TimePoint {
        self.end.unwrap_or(snapshot.max(self.start))
    }

    pub fn close_at(&self, snapshot: TimePoint) -> TimeInterval {
        TimeInterval {
            start: self.start,
            end: Some(self.end_at(snapshot)),
        }
    }

    /// Sort key: start, then end with open ends after every closed end.
    pub fn order_key(&self) -> (TimePoint, bool, Option<TimePoint>) {
        (self.start, self.end.is_none(), self.end)
    }
}

/// Default knowledge-base snapshot used to close ongoing facts.
pub fn default_snapshot() -> TimePoint {
    TimePoint {
        year: 2022,
        month: 11,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tp(y: i32, m: u32) -> TimePoint {
        TimePoint::new(y, m).unwrap()
    }

    fn after(years: u32, months: u32) -> Offset {
        Offset::new(years, months, Direction::After).unwrap()
    }

    #[test]
    fn shift_rolls_month_over_year_end() {
        assert_eq!(tp(2010, 12).shift(after(0, 2)).unwrap(), tp(2011, 2));
    }

    #[test]
    fn shift_borrows_a_year() {
        let back = Offset::new(0, 1, Direction::Before).unwrap();
        assert_eq!(tp(1900, 1).shift(back).unwrap(), tp(1899, 12));
    }

    #[test]
    fn shift_years_and_months() {
        // Mar 1950 is index 1950*12+2 = 23402; +41 = 23443 = 1953*12 + 7 -> Aug 1953.
        assert_eq!(tp(1950, 3).shift(after(3, 5)).unwrap(), tp(1953, 8));
    }

    #[test]
    fn shift_below_year_one_is_a_range_error() {
        let back = Offset::new(1, 0, Direction::Before).unwrap();
        assert!(matches!(
            tp(1, 6).shift(back),
            Err(TimeError::YearOutOfRange(0))
        ));
    }

    #[test]
    fn zero_offset_rejected() {
        assert_eq!(
            Offset::new(0, 0, Direction::After),
            Err(TimeError::ZeroOffset)
        );
        let bad: Result<Offset, _> =
            serde_json::from_str(r#"{"years":0,"months":0,"direction":"after"}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn compare_examples() {
        assert_eq!(tp(2019, 7).compare(tp(2019, 7)), Ordering::Equal);
        assert_eq!(tp(2009, 12).compare(tp(2010, 1)), Ordering::Less);
        assert_eq!(tp(1905, 2).compare(tp(1905, 1)), Ordering::Greater);
    }

    #[test]
    fn parse_month_forms() {
        assert_eq!(parse_time("Jul 2019").unwrap().point, tp(2019, 7));
        assert_eq!(parse_time("Dec 2010").unwrap().point, tp(2010, 12));
        assert_eq!(parse_time("september 1939").unwrap().point, tp(1939, 9));
        assert_eq!("Apr 634".parse::<TimePoint>().unwrap(), tp(634, 4));
    }

    #[test]
    fn parse_bare_year_keeps_year_display() {
        let e = parse_time("1905").unwrap();
        assert_eq!(e.granularity, Granularity::Year);
        assert_eq!(e.point, tp(1905, 1));
        assert_eq!(e.to_string(), "1905");
        assert!("1905".parse::<TimePoint>().is_err());
    }

    #[test]
    fn parse_errors_name_the_token() {
        match parse_time("xyz 2010") {
            Err(TimeError::Parse { token, .. }) => assert_eq!(token, "xyz"),
            other => panic!("unexpected {other:?}"),
        }
        match parse_time("Jul 20x9") {
            Err(TimeError::Parse { token, .. }) => assert_eq!(token, "20x9"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_time("").is_err());
        assert!(parse_time("Jul 2019 extra").is_err());
        assert!(parse_time("Jul 0").is_err());
    }

    #[test]
    fn canonical_format() {
        assert_eq!(format_time(tp(2019, 7)), "Jul 2019");
        assert_eq!(format_time(tp(998, 1)), "Jan 998");
        assert_eq!(parse_time("  jul   2019 ").unwrap().to_string(), "Jul 2019");
    }

    #[test]
    fn interval_bounds_are_inclusive() {
        let iv = TimeInterval::closed(tp(2019, 4), tp(2022, 12)).unwrap();
        assert!(iv.contains(tp(2019, 4)));
        assert!(iv.contains(tp(2022, 12)));
        assert!(!iv.contains(tp(2019, 3)));
        assert!(!iv.contains(tp(2023, 1)));
        assert!(TimeInterval::closed(tp(2020, 1), tp(2019, 1)).is_err());
    }

    #[test]
    fn open_interval_closes_at_snapshot() {
        let iv = TimeInterval::new(tp(2019, 4), None).unwrap();
        assert!(iv.contains(tp(2200, 1)));
        assert_eq!(iv.end_at(default_snapshot()), tp(2022, 11));
        let future = TimeInterval::new(tp(2023, 5), None).unwrap();
        assert_eq!(future.end_at(default_snapshot()), tp(2023, 5));
    }

    fn arb_point() -> impl Strategy<Value = TimePoint> {
        (200i32..=3000, 1u32..=12).prop_map(|(y, m)| tp(y, m))
    }

    fn arb_offset() -> impl Strategy<Value = Offset> {
        (0u32..=100, 0u32..=30, any::<bool>())
            .prop_filter("non-zero", |(y, m, _)| *y + *m > 0)
            .prop_map(|(y, m, a)| {
                let dir = if a { Direction::After } else { Direction::Before };
                Offset::new(y, m, dir).unwrap()
            })
    }

    proptest! {
        #[test]
        fn shift_round_trips(t in arb_point(), o in arb_offset()) {
            let there = t.shift(o).unwrap();
            prop_assert_eq!(there.shift(o.mirror()).unwrap(), t);
            prop_assert!((1..=12).contains(&there.month()));
        }

        #[test]
        fn years_are_twelve_months(t in arb_point(), o in arb_offset()) {
            let flat = Offset::new(0, o.years() * 12 + o.months(), o.direction()).unwrap();
            prop_assert_eq!(t.shift(o).unwrap(), t.shift(flat).unwrap());
        }

        #[test]
        fn compare_matches_month_index(a in arb_point(), b in arb_point()) {
            let ia = a.year() as i64 * 12 + a.month() as i64;
            let ib = b.year() as i64 * 12 + b.month() as i64;
            prop_assert_eq!(a.compare(b), ia.cmp(&ib));
            prop_assert_eq!(b.compare(a), a.compare(b).reverse());
        }

        #[test]
        fn format_parse_round_trip(t in arb_point()) {
            prop_assert_eq!(format_time(t).parse::<TimePoint>().unwrap(), t);
        }
    }
}
