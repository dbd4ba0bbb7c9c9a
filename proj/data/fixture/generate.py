"""Regenerates the bundled fixture: a 60 s cooking-vlog style clip.

Writes transcript.srt, danmu.xml, keyframes.json and audio.wav next to this
file. Output is deterministic.
"""

import json
import math
import pathlib
import struct
import wave

import numpy as np

HERE = pathlib.Path(__file__).resolve().parent
RATE = 8000
DURATION_S = 60.0

SENTENCES = [
    (1000, 4100, "Hello, welcome to the video!"),
    (4500, 8000, "Today I am opening a box of strange snacks from the night market."),
    (8300, 12000, "This snack is shaped like a little foot and smells of sweet corn."),
    (12300, 15500, "The corn snack tastes crunchy, sweet, and a little salty too."),
    (15800, 18000, "Now I need a drink, so here is some bottled water."),
    (18200, 20000, "Cold water after spicy food always feels great."),
    (32000, 35500, "Okay, back to the table, I also bought a new phone case."),
    (35800, 39200, "The phone case is bright pink and has a tiny mirror."),
    (39500, 42000, "My old phone case cracked last week, sadly."),
    (42300, 45500, "Let me tell you the price of everything today."),
    (45800, 48000, "All of this cost less than twenty dollars in total."),
    (48200, 50000, "Thanks for watching, see you next time!"),
]

COMMENTS = [
    ("2.0", "Hello everyone!"),
    ("3.0", "I'm here for a second time!"),
    ("6.5", "Night market snacks are the best"),
    ("9.0", "The snack looks like feet."),
    ("9.5", "It really looks like a foot haha"),
    ("10.2", "the snack looks like  feet."),
    ("13.0", "My favorite snack"),
    ("14.0", "It is too sour"),
    ("16.5", "Why not buy an airplane?"),
    ("17.0", "The one saying 'Why not buy an airplane', are you serious?"),
    ("18.5", "Bottled water again, so healthy"),
    ("21.0", "This music is so good"),
    ("22.5", "What song is this music?"),
    ("27.0", "I may give it a try"),
    ("29.0", "The music is too loud"),
    ("33.0", "Pink phone case is cute"),
    ("36.0", "A phone case with a mirror, nice!"),
    ("37.0", "Nice!"),
    ("37.5", "nice!"),
    ("40.0", "My phone case cracked too"),
    ("44.0", "Twenty dollars is cheap"),
    ("46.0", "So cheap, twenty dollars for all that"),
    ("51.0", "Thanks for the video!"),
    ("52.0", "Bye bye"),
    ("55.0", "Great video, thanks"),
]

KEYFRAMES = [
    {"time_ms": 9000, "image_path": "frames/0009.jpg", "caption_hint": "A snack shaped like a small foot on a plate."},
    {"time_ms": 17000, "image_path": "frames/0017.jpg", "caption_hint": "A man is drinking bottled water."},
    {"time_ms": 24000, "image_path": "frames/0024.jpg", "caption_hint": "A band plays loud music on a small stage."},
    {"time_ms": 36000, "image_path": "frames/0036.jpg", "caption_hint": "A bright pink phone case with a tiny mirror."},
]

LOUD = (24.0, 26.5)


def clock(ms):
    h, rest = divmod(ms, 3_600_000)
    m, rest = divmod(rest, 60_000)
    s, ms = divmod(rest, 1000)
    return f"{h:02d}:{m:02d}:{s:02d},{ms:03d}"


def write_srt():
    cues = []
    for i, (start, end, text) in enumerate(SENTENCES, 1):
        cues.append(f"{i}\n{clock(start)} --> {clock(end)}\n{text}\n")
    (HERE / "transcript.srt").write_text("\n".join(cues), encoding="utf-8")


def write_danmu():
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', "<i>"]
    for n, (t, text) in enumerate(COMMENTS):
        user = f"u{(n * 7919) % 65536:04x}"
        body = text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace("'", "&apos;")
        lines.append(f'  <d p="{t},1,25,16777215,{1700000000 + 37 * n},0,{user},{1000 + n}">{body}</d>')
    lines.append("</i>")
    (HERE / "danmu.xml").write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_keyframes():
    (HERE / "keyframes.json").write_text(json.dumps(KEYFRAMES, indent=2) + "\n", encoding="utf-8")


def write_audio():
    rng = np.random.default_rng(20240601)
    n = int(DURATION_S * RATE)
    t = np.arange(n) / RATE
    x = 0.02 * rng.standard_normal(n)
    for start, end, _ in SENTENCES:
        a, b = start * RATE // 1000, end * RATE // 1000
        seg = t[a:b]
        voice = 0.18 * np.sin(2 * math.pi * 140 * seg) + 0.08 * np.sin(2 * math.pi * 420 * seg)
        syllables = 0.5 + 0.5 * np.sin(2 * math.pi * 4.0 * seg) ** 2
        x[a:b] += voice * syllables
    a, b = int(LOUD[0] * RATE), int(LOUD[1] * RATE)
    x[a:b] = 0.95 * np.sign(np.sin(2 * math.pi * 220 * t[a:b]) + 1e-9)
    pcm = np.clip(np.round(x * 32767), -32768, 32767).astype("<i2")
    with wave.open(str(HERE / "audio.wav"), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(RATE)
        w.writeframes(pcm.tobytes())


if __name__ == "__main__":
    write_srt()
    write_danmu()
    write_keyframes()
    write_audio()
