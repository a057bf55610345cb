import h5py
import numpy as np


class BuildRecorder:
    def __init__(self, save_path):
        """
        Open (or append to) an HDF5 file receiving per-slice fit diagnostics.
        """
        self.save_path = save_path
        self.file = h5py.File(save_path, 'a')

    def create_slice_group(self, rho_idx, rho):
        """
        Create the group holding one albedo slice of the build.
        """
        group_name = f'slice_{rho_idx:03d}'
        if group_name not in self.file:
            grp = self.file.create_group(group_name)
            grp.attrs['rho'] = rho
        return self.file[group_name]

    def save_slice(self, rho_idx, rho, anchor_values, status, alpha, beta, c):
        """
        Save the diagnostics of one albedo slice.

        Args:
            rho_idx (int): Index of the slice on the albedo grid.
            rho (float): Albedo of the slice.
            anchor_values (np.ndarray): Oracle values at the anchors, (theta, r, 3) float64.
            status (np.ndarray): Fit status codes, (theta, r) uint8.
            alpha, beta, c (np.ndarray): Fitted parameters, (theta, r) float64.
        """
        grp = self.create_slice_group(rho_idx, rho)

        for name, data, dtype in (
            ('anchor_values', anchor_values, 'float64'),
            ('status', status, 'uint8'),
            ('alpha', alpha, 'float64'),
            ('beta', beta, 'float64'),
            ('c', c, 'float64'),
        ):
            if name in grp:
                del grp[name]
            grp.create_dataset(name, data=np.asarray(data, dtype=dtype), compression='gzip')

        # Running per-slice summary: rho, clamped count, degenerate count
        row = np.array([[rho, np.count_nonzero(status >= 2), np.count_nonzero(status == 1)]])
        if 'summary' not in self.file:
            self.file.create_dataset(
                'summary',
                data=row,
                maxshape=(None, 3),
                dtype='float64',
                chunks=True
            )
        else:
            self.file['summary'].resize((self.file['summary'].shape[0] + 1), axis=0)
            self.file['summary'][-1] = row[0]

    def close(self):
        """
        Close the HDF5 file.
        """
        try:
            self.file.close()
        except Exception:
            pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):
        self.close()
