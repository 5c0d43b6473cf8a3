//! Scene descriptions synthesized from ground truth in place of visual
//! question answering.

use std::collections::BTreeSet;

use crate::perception::{visible_classes, CameraRig};
use crate::world::{EnvironmentSpec, Pose};

/// Deterministic paragraph: the setting, the room the robot is in, other
/// rooms in view and the visible object classes, all sorted by label.
pub fn generate_descriptions(env: &EnvironmentSpec, pose: &Pose, rig: &CameraRig) -> String {
    let mut s = format!("The general setting is {}.", env.setting);
    let here = env.room_label_at(&pose.position());
    if let Some(room) = here {
        s.push_str(&format!(" The robot is in a {room}."));
    }
    let seen: Vec<_> = env.objects.iter().filter(|o| rig.sees(env, pose, &o.position).is_some()).collect();
    let other_rooms: BTreeSet<&str> = seen
        .iter()
        .filter_map(|o| o.room_label.as_deref())
        .filter(|r| Some(*r) != here)
        .collect();
    if !other_rooms.is_empty() {
        s.push_str(&format!(" The cameras also look into a {}.", other_rooms.into_iter().collect::<Vec<_>>().join(", a ")));
    }
    let classes = visible_classes(env, pose, rig);
    if !classes.is_empty() {
        let items: Vec<String> = classes
            .iter()
            .map(|(c, n)| if *n == 1 { format!("a {c}") } else { format!("{n} {c}s") })
            .collect();
        s.push_str(&format!(" Visible objects: {}.", items.join(", ")));
    }
    s
}
