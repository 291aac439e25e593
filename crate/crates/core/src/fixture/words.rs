//! Word lists for synthetic titles and filler text. None of these words can
//! form a detector phrase; a unit test in the parent module checks this.

pub const ADJECTIVES: &[&str] = &[
    "happy", "bright", "little", "magic", "funny", "clever", "big", "tiny", "shiny", "brave",
    "quiet", "sunny", "jolly", "cosy", "super", "lucky", "wild", "golden", "silver", "speedy",
];

pub const NOUNS: &[&str] = &[
    "star", "garden", "puzzle", "rocket", "rainbow", "castle", "dragon", "forest", "ocean",
    "planet", "robot", "teddy", "piano", "paint", "shape", "number", "letter", "story", "song",
    "animal", "zoo", "farm", "train", "boat", "cloud", "moon", "apple", "cookie", "bubble",
    "kite", "island", "treasure", "lesson", "quiz", "sticker", "pixel", "comet", "panda",
];

pub const VERBS: &[&str] = &[
    "play", "draw", "learn", "build", "explore", "sing", "dance", "match", "count", "read",
    "collect", "tap", "swipe", "jump", "find", "create", "discover", "save", "open", "start",
];

pub const STUDIOS: &[&str] = &[
    "sunnyapps", "brightbyte", "kitekids", "pixelpond", "moonbeam", "tinytown", "bluewhale",
    "redpanda", "greenleaf", "starfield", "appletree", "cometlab",
];

pub fn title_suffixes(category: crate::catalog::Category) -> &'static [&'static str] {
    use crate::catalog::Category::*;
    match category {
        Education => &["Academy", "Lessons", "School", "Tutor"],
        Game => &["Adventure", "Quest", "Run", "Puzzle"],
        ArtAndDesign => &["Studio", "Sketch", "Canvas"],
        HealthAndFitness => &["Fit", "Steps"],
        MusicAndAudio => &["Beats", "Tunes"],
        Tools => &["Toolbox", "Helper"],
        Entertainment => &["TV", "Show", "Stories", "Fun"],
        Lifestyle => &["Life", "Style"],
        Communication => &["Chat", "Talk", "Messenger"],
        Social => &["Friends", "Hub", "Circle", "Space"],
        Photography => &["Camera", "Photo"],
        VideoPlayersAndEditors => &["Video", "Clips"],
    }
}

pub const BASE_PERMISSIONS: &[&str] = &[
    "android.permission.INTERNET",
    "android.permission.ACCESS_NETWORK_STATE",
    "android.permission.VIBRATE",
    "android.permission.WAKE_LOCK",
    "android.permission.CAMERA",
    "android.permission.RECORD_AUDIO",
    "android.permission.READ_EXTERNAL_STORAGE",
    "com.android.vending.BILLING",
];

pub const LOCATION_PERMISSIONS: &[&str] = &[
    "android.permission.ACCESS_FINE_LOCATION",
    "android.permission.ACCESS_COARSE_LOCATION",
    "android.permission.ACCESS_BACKGROUND_LOCATION",
];

pub const DATA_TYPES: &[&str] = &[
    "app activity",
    "app info and performance",
    "device or other ids",
    "personal info",
    "photos and videos",
    "messages",
    "audio",
];
