//! Proleptic-Gregorian calendar dates as day numbers.
//!
//! Fusion keys on calendar dates and needs nothing beyond day arithmetic, so
//! dates are a thin wrapper over days-since-1970-01-01 with exact civil
//! conversions (Hinnant's algorithms). Parsing/formatting of real date strings
//! belongs to the companion crate.

use serde::{Deserialize, Serialize};

/// A calendar date, stored as days since 1970-01-01 (can be negative).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct Date(pub i32);

impl Date {
    /// Build from a civil year/month/day. Does not validate day-of-month.
    pub fn from_ymd(year: i32, month: u32, day: u32) -> Self {
        let y = i64::from(year) - i64::from(month <= 2);
        let era = y.div_euclid(400);
        let yoe = (y - era * 400) as u64; // [0, 399]
        let mp = u64::from((month + 9) % 12); // March = 0
        let doy = (153 * mp + 2) / 5 + u64::from(day) - 1;
        let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        Date((era * 146_097 + doe as i64 - 719_468) as i32)
    }

    /// Civil (year, month, day) of this date.
    pub fn to_ymd(self) -> (i32, u32, u32) {
        let z = i64::from(self.0) + 719_468;
        let era = z.div_euclid(146_097);
        let doe = (z - era * 146_097) as u64; // [0, 146096]
        let yoe = (doe - doe / 1460 + doe / 36524 - doe / 146_096) / 365;
        let y = yoe as i64 + era * 400;
        let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        let mp = (5 * doy + 2) / 153;
        let day = (doy - (153 * mp + 2) / 5 + 1) as u32;
        let month = ((mp + 2) % 12 + 1) as u32;
        (y as i32 + i64::from(month <= 2) as i32, month, day)
    }

    pub fn year(self) -> i32 {
        self.to_ymd().0
    }

    /// Month 1..=12.
    pub fn month(self) -> u32 {
        self.to_ymd().1
    }

    /// One-based day of year.
    pub fn day_of_year(self) -> u32 {
        let (y, _, _) = self.to_ymd();
        (self.0 - Date::from_ymd(y, 1, 1).0) as u32 + 1
    }

    /// Signed whole days from `self` to `other`.
    pub fn days_until(self, other: Date) -> i32 {
        other.0 - self.0
    }

    /// Snap to the start of the 16-day compositing period containing this
    /// date. Periods restart every year on Jan 1 (day-of-year 1, 17, 33, ...,
    /// 353); the final period absorbs the year's remaining days. Dates already
    /// on the cadence are fixed points.
    pub fn composite_start_16d(self) -> Date {
        let (y, _, _) = self.to_ymd();
        let doy = self.day_of_year();
        let start = ((doy - 1) / 16).min(22) * 16 + 1;
        Date(Date::from_ymd(y, 1, 1).0 + start as i32 - 1)
    }
}
