import os
import tempfile


def ensure_dir(dir_path: str) -> str:
    """确保目录存在

    Args:
        dir_path: 目录路径

    Returns:
        目录的绝对路径
    """
    path = os.path.abspath(dir_path)
    if not os.path.exists(path):
        os.makedirs(path)
    return path


def atomic_write_text(file_path: str, text: str) -> None:
    """原子写入文本文件

    先写入同目录下的临时文件，再用 os.replace 覆盖目标，读者不会看到半写的文件。

    Args:
        file_path: 目标文件路径
        text: 文件内容
    """
    directory = ensure_dir(os.path.dirname(os.path.abspath(file_path)))
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(file_path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_path, file_path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
